#pragma once
// Clipped-surrogate policy optimization core, shared by the sequential and the
// parameter-shared trainers.
//
// Loss on a minibatch, with rho = exp(logp_new - logp_old) and A the
// advantages normalized per minibatch (mean 0, std 1, std floored at 1e-8):
//   L = -mean(min(rho * A, clip(rho, 1-eps, 1+eps) * A))
//       - entropy_coef * mean(entropy)
// When the new policy equals the old one, L = -mean(A) before the entropy
// term.

#include <vector>

#include "wdtn/marl/policy.hpp"
#include "wdtn/neural/matrix.hpp"
#include "wdtn/neural/net.hpp"
#include "wdtn/rng.hpp"

namespace wdtn {

struct PpoHyper {
  double clip_eps = 0.2;
  double entropy_coef = 0.01;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  int epochs = 5;
  int minibatch = 256;
};

// (a - mean) / max(std, 1e-8), population std. Affine with positive scale, so
// it preserves the argmax of any advantage ranking.
std::vector<double> normalize_advantages(const std::vector<double>& adv);

struct PpoLoss {
  double total = 0.0;      // surrogate + entropy term
  double surrogate = 0.0;  // -mean(min(...))
  double entropy = 0.0;    // mean entropy
};

// Pure loss evaluation; advantages are used as given (normalize first if the
// per-minibatch convention applies). When grads are requested, dlogp/dent
// receive dL/dlogp_new and dL/dentropy per row.
PpoLoss ppo_actor_loss(const std::vector<double>& logp_new,
                       const std::vector<double>& logp_old,
                       const std::vector<double>& adv,
                       const std::vector<double>& entropy, double clip_eps,
                       double entropy_coef,
                       std::vector<double>* dlogp = nullptr,
                       std::vector<double>* dent = nullptr);

struct PpoTrainStats {
  double actor_loss = 0.0;  // mean total loss over minibatches
  double entropy = 0.0;     // mean entropy over minibatches
};

// epochs x shuffled minibatches of clipped-surrogate updates on one actor.
// adv arrives unnormalized (any per-sample weighting already applied) and is
// normalized inside each minibatch.
PpoTrainStats ppo_train_actor(ActorPolicy& actor, const Matrix& obs,
                              const Matrix& raw,
                              const std::vector<double>& logp_old,
                              const std::vector<double>& adv,
                              const PpoHyper& hp, RngStream& rng);

// epochs x shuffled minibatches of MSE regression of V(state) onto returns
// (no value clipping). Returns the mean minibatch loss.
double critic_fit(DenseNet& critic, AdamNet& opt, const Matrix& states,
                  const std::vector<double>& returns, const PpoHyper& hp,
                  RngStream& rng);

// In-place Fisher-Yates using rng.uniform_int.
void shuffle_indices(std::vector<int>& idx, RngStream& rng);

}  // namespace wdtn
