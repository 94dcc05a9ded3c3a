#pragma once
// Cooperative multi-agent environment wrapped around the simulator.
//
// Agents, in fixed order: one per MU (scalar transmit-power action in (0,1)),
// one per BS (allocation-weight vector in (0,1)^n_mus), one controller
// (per-MU categorical deployment target). Reward is shared:
//   r = -(total energy)/energy_norm - eta * failures_this_slot.
//
// Observation layouts (all positions divided by area_side, speeds by
// mean_speed):
//   MU i:      [pos (2), speed (1), twin-host one-hot (n_bss), has_request (1),
//               BS positions (2*n_bss)]
//   BS b:      [pos (2), residual capacity fraction (1),
//               per MU: pos (2), has_request (1), associated-here (1)]
//   controller:[per-MU positions (2n), twin-host one-hots (n*n_bss),
//               migrating flags (n), BS load fractions (n_bss)]
//   global:    [per MU: pos (2), speed (1), has_request (1),
//               assoc one-hot (n_bss), host one-hot (n_bss), migrating (1);
//               per BS: pos (2), load fraction (1)]
//
// Slot transition, in documented order: (1) decode actions; (2) apply
// controller migration decisions; (3) advance kinematics and re-associate;
// (4) draw the next slot's requests (staged; agents always observe the flags
// that decode/evaluate act on — slot-0 flags come from init_world);
// (5) sample channels and SINR/rate for requesting MUs (only requesting MUs
// transmit); (6) evaluate synchronization per requesting MU; (7) advance
// migrations; (8) compute the shared reward; (9) commit staged flags,
// slot_index + 1.

#include <cstdint>
#include <vector>

#include "wdtn/config.hpp"
#include "wdtn/types.hpp"
#include "wdtn/world.hpp"

namespace wdtn {

enum class AgentKind { Mu, Bs, Controller };

struct AgentSpec {
  AgentKind kind = AgentKind::Mu;
  int member = 0;   // MU id, BS id, or 0 for the controller
  int obs_dim = 0;
  int act_dim = 0;  // continuous dims, or number of categorical groups
  int n_cats = 0;   // categories per group (controller only), else 0
};

// MUs ascending, then BSs ascending, then the controller. Agents whose action
// would be empty (n_mus == 0) are omitted.
std::vector<AgentSpec> agent_specs(const ScenarioConfig& cfg);
int global_state_dim(const ScenarioConfig& cfg);

struct Observations {
  std::vector<std::vector<double>> per_agent;  // aligned with agent_specs
  std::vector<double> global_state;
};

Observations build_observations(const WorldState& w, const ScenarioConfig& cfg);

// Raw actions, aligned with agent_specs; controller entries hold category
// indices stored as doubles.
using ActionSet = std::vector<std::vector<double>>;

struct DecodedActions {
  std::vector<double> tx_power;          // W per MU
  std::vector<std::vector<double>> alloc;  // [bs][mu] cycles/s
  std::vector<int> migrate_target;       // per MU (empty without controller)
  long clipped = 0;  // raw continuous entries that arrived outside (0,1)
};

// Power: p_min + raw*(p_max-p_min). Allocation: BS b splits server_capacity
// over MUs hosted at b with a request, proportionally to its raw weights
// (equal split when they sum to 0); everyone else gets 0.
DecodedActions decode_actions(const ActionSet& raw, const WorldState& w,
                              const ScenarioConfig& cfg);

double compute_reward(const SlotMetrics& m, const ScenarioConfig& cfg);

struct StepRecord {
  Observations obs;   // what the agents saw when choosing `actions`
  ActionSet actions;
  double reward = 0.0;
  SlotMetrics metrics;
  bool done = false;
};

class Environment {
 public:
  // Worlds are rebuilt per episode; episode k uses the stream seed
  // splitmix64(env_seed ^ splitmix64(k)) (a reproducibility contract).
  Environment(const ScenarioConfig& cfg, std::uint64_t env_seed);

  void reset();
  const WorldState& world() const { return world_; }
  const ScenarioConfig& config() const { return cfg_; }
  Observations observe() const { return build_observations(world_, cfg_); }
  StepRecord step(const ActionSet& actions);

  long episodes_started() const { return episode_; }
  long decode_clip_count() const { return clip_count_; }

 private:
  ScenarioConfig cfg_;
  std::uint64_t env_seed_;
  long episode_ = 0;
  long clip_count_ = 0;
  WorldState world_;
};

}  // namespace wdtn
