#include "wdtn/neural/special.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>

namespace wdtn {

double sigmoid(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double softplus_derivative(double x) { return sigmoid(x); }

double digamma(double x) {
  // Defined here for positive arguments only; anything else (including NaN
  // from an upstream numerical blow-up) propagates as quiet NaN so the
  // training driver can detect it in the loss instead of crashing.
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double r = 0.0;
  while (x < 10.0) {  // psi(x) = psi(x+1) - 1/x
    r -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x, inv2 = inv * inv;
  // asymptotic: ln x - 1/(2x) - sum B_2n/(2n x^2n); truncation error at
  // x >= 10 is below 1e-13
  return r + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12.0 -
                 inv2 * (1.0 / 120.0 -
                         inv2 * (1.0 / 252.0 -
                                 inv2 * (1.0 / 240.0 - inv2 / 132.0))));
}

double trigamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double r = 0.0;
  while (x < 10.0) {  // psi'(x) = psi'(x+1) + 1/x^2
    r += 1.0 / (x * x);
    x += 1.0;
  }
  double inv = 1.0 / x, inv2 = inv * inv;
  // asymptotic: 1/x + 1/(2x^2) + sum B_2n x^-(2n+1); error < 1e-13 at x >= 10
  return r +
         inv * (1.0 +
                inv * (0.5 +
                       inv * (1.0 / 6.0 -
                              inv2 * (1.0 / 30.0 -
                                      inv2 * (1.0 / 42.0 -
                                              inv2 * (1.0 / 30.0 -
                                                      inv2 * 5.0 / 66.0))))));
}

Quadrature gauss_legendre_01(int n) {
  assert(n >= 2);
  Quadrature q;
  q.nodes.resize(static_cast<size_t>(n));
  q.weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Chebyshev-angle starting guess for the i-th root of P_n on [-1,1]
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[static_cast<size_t>(n - 1 - i)] = 0.5 * (x + 1.0);  // map to [0,1]
    q.weights[static_cast<size_t>(n - 1 - i)] = 0.5 * w;
  }
  return q;
}

}  // namespace wdtn
