#pragma once
// Off-policy deterministic-policy baseline with one centralized critic.
//
// Each agent owns a deterministic actor: continuous actions are
// logistic-squashed net outputs with decaying Gaussian exploration noise at
// rollout time (clipped into [1e-6, 1-1e-6]); the controller's discrete
// action uses a relaxed-categorical (temperature-annealed straight-through)
// head during training and argmax at execution. A single critic scores the
// global state plus every agent's executed action (the controller's as a
// one-hot block); the team reward is shared, so one critic serves all actors.
// Targets are r + gamma * (1 - done) * Q'(s', a') with a' from the target
// actors (greedy argmax for the controller); all target nets track the mains
// by tau soft updates.

#include <cstdint>
#include <string>
#include <vector>

#include "wdtn/config.hpp"
#include "wdtn/env.hpp"
#include "wdtn/marl/replay.hpp"
#include "wdtn/neural/matrix.hpp"
#include "wdtn/neural/net.hpp"
#include "wdtn/rng.hpp"

namespace wdtn {

struct MaddpgOptions {
  std::vector<int> hidden = {64, 64};
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  int batch = 256;
  long replay_capacity = 100000;
  long warmup = 1024;  // minimum stored transitions before updates start
};

struct MaddpgStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;  // mean of -Q objectives across agents
};

class MaddpgTrainer {
 public:
  MaddpgTrainer(const std::vector<AgentSpec>& specs, int state_dim,
                const MaddpgOptions& opt, std::uint64_t seed);

  const std::vector<AgentSpec>& specs() const { return specs_; }
  int joint_dim() const { return joint_dim_; }
  long replay_size() const { return replay_.size(); }
  const ReplayBuffer& replay() const { return replay_; }

  // Rollout action with exploration; act_out feeds the environment, joint_out
  // (size joint_dim) is the executed joint-action row stored in replay.
  void act_explore(const Observations& obs, double sigma, double temp,
                   RngStream& rng, ActionSet& act_out,
                   std::vector<double>& joint_out) const;

  // Deterministic action (no noise, controller argmax).
  ActionSet act_eval(const Observations& obs) const;

  void push(const Observations& pre, const std::vector<double>& joint,
            double reward, const Observations& post, bool done);

  // One gradient step on the critic and every actor plus soft target updates;
  // returns false (skip) while the replay holds fewer than max(batch, warmup)
  // transitions. temp is the current relaxed-categorical temperature.
  bool update(RngStream& rng, double temp, MaddpgStats* stats = nullptr);

  void soft_update(double tau);

  // Critic regression targets for the given replay rows (test oracle).
  std::vector<double> debug_targets(const std::vector<long>& idx) const;

  // Target-net parameter access for the copy/soft-update oracles.
  const DenseNet& critic() const { return critic_; }
  const DenseNet& target_critic() const { return tgt_critic_; }
  const DenseNet& actor_net(int slot) const { return actors_[slot]; }
  const DenseNet& target_actor_net(int slot) const { return tgt_actors_[slot]; }

  std::vector<std::pair<std::string, std::vector<double>>> to_blobs() const;
  void from_blobs(
      const std::vector<std::pair<std::string, std::vector<double>>>& blobs);

  MaddpgOptions& options() { return opt_; }

 private:
  std::vector<double> flatten_obs(const Observations& o) const;
  void target_joint_row(const double* next_obs_row, double* joint) const;

  std::vector<AgentSpec> specs_;
  int state_dim_ = 0;
  int obs_total_ = 0;   // sum of per-agent obs dims
  int joint_dim_ = 0;   // sum of executed-action widths
  std::vector<int> obs_off_;  // per agent, offset into the flattened obs block
  std::vector<int> act_off_;  // per agent, offset into the joint-action block
  std::vector<int> act_width_;
  MaddpgOptions opt_;

  std::vector<DenseNet> actors_, tgt_actors_;
  std::vector<AdamNet> actor_opt_;
  DenseNet critic_, tgt_critic_;
  AdamNet critic_opt_;
  ReplayBuffer replay_;
};

}  // namespace wdtn
