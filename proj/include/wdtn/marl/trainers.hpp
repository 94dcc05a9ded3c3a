#pragma once
// On-policy trainers over the shared PPO core.
//
// Sequential mode: one actor AND one critic per agent. Each update computes
// per-agent advantages from the agent's own critic (on the global state),
// then visits agents in a fresh random order; agent k trains on M * A_k where
// M starts at 1 and, after each agent's update, is multiplied on the full
// buffer by exp(logp_new - logp_old) of the just-updated actor. Critics then
// regress their values onto their returns (plain MSE).
//
// Shared mode: one actor and one critic per agent kind (MU / BS / controller);
// the kind's actor trains jointly on all member agents' rows, without the M
// factor, and every member's policy is literally the same network.

#include <cstdint>
#include <string>
#include <vector>

#include "wdtn/config.hpp"
#include "wdtn/env.hpp"
#include "wdtn/marl/policy.hpp"
#include "wdtn/marl/ppo.hpp"
#include "wdtn/marl/rollout.hpp"

namespace wdtn {

struct PgOptions {
  PpoHyper hyper;
  double gamma = 0.99;
  double lam = 0.95;
  std::vector<int> hidden = {64, 64};
  double log_std_init = -1.0;
  // Test hooks for the controlled-equivalence and update-rule oracles.
  bool force_m_one = false;
  bool fixed_order = false;
};

// Per-agent snapshot of the correction factor M, captured by the update-rule
// tests.
struct SeqUpdateTrace {
  std::vector<int> order;                     // agent visit order
  std::vector<std::vector<double>> m_after;   // M after each visited agent
};

struct PgUpdateStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
};

class PgTrainer {
 public:
  enum class Mode { Sequential, Shared };

  PgTrainer(const ScenarioConfig& cfg, Mode mode, HeadKind cont_head,
            const PgOptions& opt, std::uint64_t seed);

  const std::vector<AgentSpec>& specs() const { return specs_; }
  const std::vector<int>& agent_actor() const { return agent_actor_; }
  std::vector<ActorPolicy>& actors() { return actors_; }
  const std::vector<ActorPolicy>& actors() const { return actors_; }
  std::vector<DenseNet>& critics() { return critics_; }
  const std::vector<DenseNet>& critics() const { return critics_; }
  Mode mode() const { return mode_; }

  // Full update: per-actor-slot GAE (filling buf.value), actor pass, critic
  // fits. `trace`, when given, records the sequential-mode M bookkeeping.
  PgUpdateStats update(RolloutBuffer& buf, RngStream& rng,
                       SeqUpdateTrace* trace = nullptr);

  // Sequential-mode actor pass on externally supplied per-agent advantages
  // (indexed by actor slot). Exposed for the update-rule oracle tests.
  PgUpdateStats sequential_actor_pass(
      const RolloutBuffer& buf, const std::vector<std::vector<double>>& adv,
      RngStream& rng, SeqUpdateTrace* trace = nullptr);

  // Checkpoint payload: every parameter tensor, named.
  std::vector<std::pair<std::string, std::vector<double>>> to_blobs() const;
  void from_blobs(
      const std::vector<std::pair<std::string, std::vector<double>>>& blobs);

 private:
  void gae_all(RolloutBuffer& buf, std::vector<std::vector<double>>& adv,
               std::vector<std::vector<double>>& ret) const;

  ScenarioConfig cfg_;
  Mode mode_;
  PgOptions opt_;
  std::vector<AgentSpec> specs_;
  std::vector<int> agent_actor_;    // agent slot -> actor/critic slot
  std::vector<std::vector<int>> slot_members_;  // actor slot -> agent slots
  std::vector<ActorPolicy> actors_;
  std::vector<DenseNet> critics_;
  std::vector<AdamNet> critic_opt_;
};

}  // namespace wdtn
