#pragma once
// On-policy rollout storage and generalized advantage estimation.
//
// The buffer holds `steps` synchronized slots from `n_envs` parallel
// environment lanes; row index = step * n_envs + lane. Rewards and dones are
// shared across agents; observations, raw actions, log-probs and value
// estimates are per agent.
//
// Episodes end only by hitting the fixed horizon — a time limit, not a
// terminal state — so the return past the cut is not zero. Treating the cut
// as terminal makes the value target depend on the unobserved slot index and
// the critic cannot fit it. The buffer therefore records the pre-reset state
// at every cut (boundary_state) and advantage estimation bootstraps the value
// there, while still stopping the advantage recursion at the boundary.

#include <vector>

#include "wdtn/env.hpp"
#include "wdtn/marl/policy.hpp"
#include "wdtn/neural/matrix.hpp"
#include "wdtn/rng.hpp"

namespace wdtn {

struct RolloutBuffer {
  int n_envs = 0;
  int steps = 0;
  Matrix state;        // rows x state_dim, what critics condition on
  Matrix final_state;  // n_envs x state_dim, post-rollout bootstrap states
  Matrix boundary_state;  // rows x state_dim; pre-reset state where done=1,
                          // zero elsewhere
  std::vector<Matrix> obs;                 // per agent: rows x obs_dim
  std::vector<Matrix> raw;                 // per agent: rows x act_dim
  std::vector<std::vector<double>> logp;   // per agent: rows
  std::vector<std::vector<double>> value;  // per agent: rows (set by trainer)
  std::vector<double> reward;              // rows
  std::vector<double> done;                // rows, 0/1

  int rows() const { return n_envs * steps; }
};

// Single-lane GAE. values has T+1 entries (bootstrap appended); done[t] = 1
// stops the recursion across the boundary and replaces the next-state value:
//   next_v  = done_t ? (boot ? (*boot)[t] : 0) : values[t+1]
//   delta_t = r_t + gamma * next_v - values[t]
//   adv_t   = delta_t + gamma * lam * (1 - done_t) * adv_{t+1}
// returns[t] = adv[t] + values[t]. boot, when given, holds the value of the
// pre-reset state at each cut (time-limit bootstrapping); without it a cut is
// treated as a true terminal.
void compute_gae(const std::vector<double>& rewards,
                 const std::vector<double>& values,
                 const std::vector<double>& dones, double gamma, double lam,
                 std::vector<double>& adv, std::vector<double>& ret,
                 const std::vector<double>* boot = nullptr);

struct CollectStats {
  double reward_sum = 0.0;
  long env_steps = 0;     // lane-steps collected
  long head_clips = 0;    // Gaussian exec clips
  long cont_samples = 0;  // continuous action scalars drawn
};

// Steps all lanes in lockstep for `steps` slots, sampling every agent's action
// from its policy (actors[agent_actor[agent]]); lanes that finish an episode
// are reset in place. cur_obs carries the pending observations across calls.
RolloutBuffer collect_rollout(std::vector<Environment>& envs,
                              std::vector<Observations>& cur_obs,
                              const std::vector<ActorPolicy>& actors,
                              const std::vector<int>& agent_actor, int steps,
                              std::vector<RngStream>& act_rng,
                              CollectStats& stats);

}  // namespace wdtn
