#pragma once
// Scalar special functions the policy heads need, plus Gauss-Legendre nodes
// for the density-normalization checks.

#include <vector>

namespace wdtn {

double sigmoid(double x);
double softplus(double x);          // log(1+e^x), overflow-safe
double softplus_derivative(double x);  // = sigmoid(x)

// psi(x) and psi'(x) for x > 0 (upward recurrence + asymptotic series;
// absolute error far below 1e-10 over the ranges the heads produce).
double digamma(double x);
double trigamma(double x);

struct Quadrature {
  std::vector<double> nodes;    // on [0,1]
  std::vector<double> weights;  // sum to 1
};

// n-point Gauss-Legendre rule mapped to [0,1] (Newton on Legendre roots).
Quadrature gauss_legendre_01(int n);

}  // namespace wdtn
