#pragma once
// A policy = dense net + distribution head + its own Adam state.
//
// Continuous agents use either a Beta head (samples strictly interior to
// (0,1), never clipped) or a Gaussian head (sigmoid mean, learnable
// state-independent log-std, samples clipped into [1e-6, 1-1e-6] with the
// density evaluated at the unclipped draw). The controller always uses a
// categorical head with one group per MU.
//
// "raw" actions are what densities are evaluated at (Beta sample, unclipped
// Gaussian draw, category indices); "exec" actions are what the environment
// receives (identical except for the Gaussian clip).

#include <cstdint>
#include <vector>

#include "wdtn/neural/heads.hpp"
#include "wdtn/neural/matrix.hpp"
#include "wdtn/neural/net.hpp"
#include "wdtn/rng.hpp"

namespace wdtn {

enum class HeadKind { Beta, Gauss, Cat };

struct ActorPolicy {
  HeadKind head = HeadKind::Beta;
  int dims = 0;  // action dims (continuous) or categorical groups
  int cats = 0;  // categories per group (categorical only)
  DenseNet net;
  std::vector<double> log_std;  // Gaussian only

  AdamNet opt;
  AdamParam opt_log_std;

  int out_dim() const {
    switch (head) {
      case HeadKind::Beta: return 2 * dims;
      case HeadKind::Gauss: return dims;
      case HeadKind::Cat: return dims * cats;
    }
    return 0;
  }
};

// hidden = hidden layer widths; the output layer is scaled down (0.01) so the
// initial policy is near-uniform / near-centred.
ActorPolicy make_actor(HeadKind head, int obs_dim, int dims, int cats,
                       const std::vector<int>& hidden, double log_std_init,
                       RngStream& init);

// Evaluation of a batch of raw actions under the current parameters.
struct ActorEval {
  Matrix out;  // net linear output
  DenseNet::Cache cache;
  std::vector<double> logp;     // per row
  std::vector<double> entropy;  // per row
  BetaBatch bb;
  GaussBatch gb;
  CatBatch cb;
};

ActorEval actor_eval(const ActorPolicy& a, const Matrix& obs,
                     const Matrix& raw);

struct ActorGrads {
  DenseNet::Grads g;
  std::vector<double> dlog_std;  // Gaussian only (empty otherwise)
};

ActorGrads make_actor_grads(const ActorPolicy& a);

// Backprop per-row dL/dlogp and dL/dentropy into parameter gradients
// (accumulated into `grads`, zeroed here).
void actor_backward(const ActorPolicy& a, const ActorEval& ev,
                    const Matrix& raw, const std::vector<double>& dlogp,
                    const std::vector<double>& dent, ActorGrads& grads);

void actor_adam(ActorPolicy& a, const ActorGrads& grads, double lr);

// One stochastic action per batch row, rngs[row] supplying the draws.
struct BatchSample {
  std::vector<std::vector<double>> raw;   // per row
  std::vector<std::vector<double>> exec;  // per row
  std::vector<double> logp;               // per row
  long clips = 0;                         // Gaussian exec clips in this batch
};

BatchSample actor_sample_eval(const ActorPolicy& a, const Matrix& obs,
                              std::vector<RngStream*>& rngs);

// Deterministic action: Beta mean, Gaussian mean, categorical argmax.
std::vector<double> actor_act_mean(const ActorPolicy& a,
                                   const std::vector<double>& obs);

}  // namespace wdtn
