#pragma once
// Policy heads on top of a DenseNet's linear output.
//
// Beta: for D action dims the net emits 2D values, columns [0,D) the alpha
// pre-activations and [D,2D) the beta ones; alpha = 1 + softplus(pre) keeps
// both shape parameters > 1 (unimodal, no boundary spikes), and samples are
// strictly interior to (0,1) — no clipping ever applies.
//
// Gaussian: the net emits D mean pre-activations (mean = sigmoid(pre)); the
// log standard deviations are a separate state-independent learnable vector.
// Samples are clipped into [1e-6, 1-1e-6] after the fact, but densities are
// always evaluated at the unclipped sample.
//
// Categorical: G independent groups of C logits each (the controller's per-MU
// deployment choice); actions are the chosen indices.
//
// All log-probabilities and entropies are summed over dims/groups, one scalar
// per batch row.

#include <vector>

#include "wdtn/neural/matrix.hpp"
#include "wdtn/rng.hpp"

namespace wdtn {

// ---------- Beta ----------

struct BetaBatch {
  Matrix alpha, beta;           // B x D
  std::vector<double> logp;     // B
  std::vector<double> entropy;  // B
};

BetaBatch beta_eval(const Matrix& out, const Matrix& actions);

// Gradient at the net output given per-row upstream dL/dlogp and dL/dentropy.
Matrix beta_backward(const Matrix& out, const BetaBatch& eb,
                     const Matrix& actions, const std::vector<double>& dlogp,
                     const std::vector<double>& dent);

std::vector<double> beta_sample_row(const double* out_row, int D, RngStream& rng);
std::vector<double> beta_mean_row(const double* out_row, int D);

// ---------- Gaussian ----------

struct GaussBatch {
  Matrix mean;                  // B x D
  std::vector<double> logp;     // B
  std::vector<double> entropy;  // B
};

GaussBatch gauss_eval(const Matrix& out, const std::vector<double>& log_std,
                      const Matrix& raw_actions);

Matrix gauss_backward(const Matrix& out, const GaussBatch& gb,
                      const std::vector<double>& log_std,
                      const Matrix& raw_actions,
                      const std::vector<double>& dlogp,
                      const std::vector<double>& dent,
                      std::vector<double>& dlog_std);

struct GaussSample {
  std::vector<double> raw;   // unclipped, for density evaluation
  std::vector<double> exec;  // clipped, what the environment receives
  int clips = 0;
};

GaussSample gauss_sample_row(const double* out_row,
                             const std::vector<double>& log_std, int D,
                             RngStream& rng);
std::vector<double> gauss_mean_row(const double* out_row, int D);

// ---------- Categorical ----------

struct CatBatch {
  Matrix probs;                 // B x (G*C)
  std::vector<double> logp;     // B
  std::vector<double> entropy;  // B
};

// actions: B x G, chosen indices stored as doubles.
CatBatch cat_eval(const Matrix& out, int G, int C, const Matrix& actions);

Matrix cat_backward(const CatBatch& cb, int G, int C, const Matrix& actions,
                    const std::vector<double>& dlogp,
                    const std::vector<double>& dent);

std::vector<double> cat_sample_row(const double* out_row, int G, int C,
                                   RngStream& rng);
std::vector<double> cat_argmax_row(const double* out_row, int G, int C);

}  // namespace wdtn
