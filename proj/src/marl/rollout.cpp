#include "wdtn/marl/rollout.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace wdtn {

void compute_gae(const std::vector<double>& rewards,
                 const std::vector<double>& values,
                 const std::vector<double>& dones, double gamma, double lam,
                 std::vector<double>& adv, std::vector<double>& ret,
                 const std::vector<double>* boot) {
  const size_t T = rewards.size();
  assert(values.size() == T + 1 && dones.size() == T);
  assert(boot == nullptr || boot->size() == T);
  adv.assign(T, 0.0);
  ret.assign(T, 0.0);
  double running = 0.0;
  for (size_t i = T; i-- > 0;) {
    const double mask = 1.0 - dones[i];
    const double next_v =
        dones[i] != 0.0 ? (boot ? (*boot)[i] : 0.0) : values[i + 1];
    const double delta = rewards[i] + gamma * next_v - values[i];
    running = delta + gamma * lam * mask * running;
    adv[i] = running;
    ret[i] = running + values[i];
    if (!std::isfinite(adv[i]))
      throw std::runtime_error("non-finite advantage in GAE");
  }
}

RolloutBuffer collect_rollout(std::vector<Environment>& envs,
                              std::vector<Observations>& cur_obs,
                              const std::vector<ActorPolicy>& actors,
                              const std::vector<int>& agent_actor, int steps,
                              std::vector<RngStream>& act_rng,
                              CollectStats& stats) {
  const int E = static_cast<int>(envs.size());
  const int A = static_cast<int>(agent_actor.size());
  assert(static_cast<int>(cur_obs.size()) == E &&
         static_cast<int>(act_rng.size()) == E);

  RolloutBuffer buf;
  buf.n_envs = E;
  buf.steps = steps;
  const int rows = E * steps;
  const int S = static_cast<int>(cur_obs[0].global_state.size());
  buf.state = Matrix(rows, S);
  buf.final_state = Matrix(E, S);
  buf.boundary_state = Matrix(rows, S);
  buf.obs.resize(A);
  buf.raw.resize(A);
  buf.logp.assign(A, std::vector<double>(rows, 0.0));
  buf.value.assign(A, std::vector<double>(rows, 0.0));
  buf.reward.assign(rows, 0.0);
  buf.done.assign(rows, 0.0);
  for (int a = 0; a < A; ++a) {
    const ActorPolicy& pol = actors[agent_actor[a]];
    const int od = static_cast<int>(cur_obs[0].per_agent[a].size());
    buf.obs[a] = Matrix(rows, od);
    buf.raw[a] = Matrix(rows, pol.dims);
  }

  std::vector<RngStream*> rng_ptrs(E);
  for (int e = 0; e < E; ++e) rng_ptrs[e] = &act_rng[e];
  std::vector<ActionSet> acts(E);
  for (int e = 0; e < E; ++e) acts[e].resize(A);

  Matrix obs_mb;
  for (int t = 0; t < steps; ++t) {
    // Record observations and the global state, then sample each agent's
    // action batched across lanes.
    for (int e = 0; e < E; ++e) {
      const int r = t * E + e;
      const std::vector<double>& gs = cur_obs[e].global_state;
      for (int j = 0; j < S; ++j) buf.state.at(r, j) = gs[j];
    }
    for (int a = 0; a < A; ++a) {
      const ActorPolicy& pol = actors[agent_actor[a]];
      const int od = buf.obs[a].cols;
      obs_mb = Matrix(E, od);
      for (int e = 0; e < E; ++e) {
        const std::vector<double>& o = cur_obs[e].per_agent[a];
        for (int j = 0; j < od; ++j) obs_mb.at(e, j) = o[j];
      }
      BatchSample bs = actor_sample_eval(pol, obs_mb, rng_ptrs);
      stats.head_clips += bs.clips;
      if (pol.head != HeadKind::Cat)
        stats.cont_samples += static_cast<long>(E) * pol.dims;
      for (int e = 0; e < E; ++e) {
        const int r = t * E + e;
        for (int j = 0; j < od; ++j) buf.obs[a].at(r, j) = obs_mb.at(e, j);
        for (int d = 0; d < pol.dims; ++d)
          buf.raw[a].at(r, d) = bs.raw[e][d];
        buf.logp[a][r] = bs.logp[e];
        acts[e][a] = bs.exec[e];
      }
    }
    for (int e = 0; e < E; ++e) {
      const int r = t * E + e;
      StepRecord rec = envs[e].step(acts[e]);
      buf.reward[r] = rec.reward;
      buf.done[r] = rec.done ? 1.0 : 0.0;
      stats.reward_sum += rec.reward;
      ++stats.env_steps;
      if (rec.done) {
        // The cut is a time limit: keep the pre-reset state so advantage
        // estimation can bootstrap the value there.
        const Observations term = envs[e].observe();
        for (int j = 0; j < S; ++j)
          buf.boundary_state.at(r, j) = term.global_state[j];
        envs[e].reset();
      }
      cur_obs[e] = envs[e].observe();
    }
  }
  for (int e = 0; e < E; ++e) {
    const std::vector<double>& gs = cur_obs[e].global_state;
    for (int j = 0; j < S; ++j) buf.final_state.at(e, j) = gs[j];
  }
  return buf;
}

}  // namespace wdtn
