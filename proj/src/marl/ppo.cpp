#include "wdtn/marl/ppo.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace wdtn {

std::vector<double> normalize_advantages(const std::vector<double>& adv) {
  const size_t n = adv.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  const double scale = 1.0 / std::max(std::sqrt(var), 1e-8);
  for (size_t i = 0; i < n; ++i) out[i] = (adv[i] - mean) * scale;
  return out;
}

PpoLoss ppo_actor_loss(const std::vector<double>& logp_new,
                       const std::vector<double>& logp_old,
                       const std::vector<double>& adv,
                       const std::vector<double>& entropy, double clip_eps,
                       double entropy_coef, std::vector<double>* dlogp,
                       std::vector<double>* dent) {
  const size_t n = logp_new.size();
  assert(logp_old.size() == n && adv.size() == n && entropy.size() == n);
  if (dlogp) dlogp->assign(n, 0.0);
  if (dent) dent->assign(n, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  PpoLoss L;
  for (size_t i = 0; i < n; ++i) {
    const double rho = std::exp(logp_new[i] - logp_old[i]);
    const double rho_c = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps);
    const double u = rho * adv[i];
    const double uc = rho_c * adv[i];
    if (u <= uc) {
      L.surrogate -= u * inv_n;
      // d(rho * A)/dlogp_new = rho * A
      if (dlogp) (*dlogp)[i] = -u * inv_n;
    } else {
      L.surrogate -= uc * inv_n;  // clipped branch: zero gradient
    }
    L.entropy += entropy[i] * inv_n;
    if (dent) (*dent)[i] = -entropy_coef * inv_n;
  }
  L.total = L.surrogate - entropy_coef * L.entropy;
  return L;
}

void shuffle_indices(std::vector<int>& idx, RngStream& rng) {
  for (size_t i = idx.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.uniform_int(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

namespace {

void gather_rows(const Matrix& src, const std::vector<int>& idx, int lo,
                 int hi, Matrix& dst) {
  dst = Matrix(hi - lo, src.cols);
  for (int i = lo; i < hi; ++i) {
    const double* s = src.row(idx[i]);
    double* d = dst.row(i - lo);
    for (int j = 0; j < src.cols; ++j) d[j] = s[j];
  }
}

}  // namespace

PpoTrainStats ppo_train_actor(ActorPolicy& actor, const Matrix& obs,
                              const Matrix& raw,
                              const std::vector<double>& logp_old,
                              const std::vector<double>& adv,
                              const PpoHyper& hp, RngStream& rng) {
  const int n = obs.rows;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;

  ActorGrads grads = make_actor_grads(actor);
  PpoTrainStats st;
  long batches = 0;
  Matrix obs_mb, raw_mb;
  for (int ep = 0; ep < hp.epochs; ++ep) {
    shuffle_indices(idx, rng);
    for (int lo = 0; lo < n; lo += hp.minibatch) {
      const int hi = std::min(n, lo + hp.minibatch);
      gather_rows(obs, idx, lo, hi, obs_mb);
      gather_rows(raw, idx, lo, hi, raw_mb);
      std::vector<double> old_mb(hi - lo), adv_mb(hi - lo);
      for (int i = lo; i < hi; ++i) {
        old_mb[i - lo] = logp_old[idx[i]];
        adv_mb[i - lo] = adv[idx[i]];
      }
      const std::vector<double> adv_n = normalize_advantages(adv_mb);
      ActorEval ev = actor_eval(actor, obs_mb, raw_mb);
      std::vector<double> dlogp, dent;
      const PpoLoss L = ppo_actor_loss(ev.logp, old_mb, adv_n, ev.entropy,
                                       hp.clip_eps, hp.entropy_coef, &dlogp,
                                       &dent);
      actor_backward(actor, ev, raw_mb, dlogp, dent, grads);
      actor_adam(actor, grads, hp.actor_lr);
      st.actor_loss += L.total;
      st.entropy += L.entropy;
      ++batches;
    }
  }
  if (batches > 0) {
    st.actor_loss /= static_cast<double>(batches);
    st.entropy /= static_cast<double>(batches);
  }
  return st;
}

double critic_fit(DenseNet& critic, AdamNet& opt, const Matrix& states,
                  const std::vector<double>& returns, const PpoHyper& hp,
                  RngStream& rng) {
  const int n = states.rows;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;

  DenseNet::Grads grads = critic.make_grads();
  double total = 0.0;
  long batches = 0;
  Matrix st_mb;
  for (int ep = 0; ep < hp.epochs; ++ep) {
    shuffle_indices(idx, rng);
    for (int lo = 0; lo < n; lo += hp.minibatch) {
      const int hi = std::min(n, lo + hp.minibatch);
      gather_rows(states, idx, lo, hi, st_mb);
      DenseNet::Cache cache;
      Matrix v = critic.forward(st_mb, &cache);
      const int b = hi - lo;
      Matrix dv(b, 1);
      double loss = 0.0;
      for (int i = 0; i < b; ++i) {
        const double diff = v.at(i, 0) - returns[idx[lo + i]];
        loss += diff * diff / b;
        dv.at(i, 0) = 2.0 * diff / b;
      }
      grads.zero();
      critic.backward(cache, dv, grads);
      adam_step(critic, grads, opt, hp.critic_lr);
      total += loss;
      ++batches;
    }
  }
  return batches > 0 ? total / static_cast<double>(batches) : 0.0;
}

}  // namespace wdtn
