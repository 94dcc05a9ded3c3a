#pragma once
// Training driver: alternates rollout collection and updates, evaluates the
// deterministic policy on separate fixed-seed episodes at regular intervals,
// and emits one CSV row per evaluation point. A non-finite loss aborts the run
// with a diagnostic (TrainAbort), never silently.

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wdtn/config.hpp"
#include "wdtn/marl/maddpg.hpp"
#include "wdtn/marl/trainers.hpp"

namespace wdtn {

struct TrainAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Algorithm names as accepted on the command line.
inline const char* kAlgoNames[] = {"beta-happo", "gaussian-happo",
                                   "beta-mappo", "maddpg"};

struct TrainConfig {
  std::string algo = "beta-happo";
  long total_env_steps = 200000;  // lane-steps
  long eval_interval = 10000;     // lane-steps between evaluation points
  int eval_episodes = 3;

  double gamma = 0.99;
  double lam = 0.95;
  double clip_eps = 0.2;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  int epochs = 5;
  int minibatch = 256;
  int rollout_length = 128;
  int n_envs = 4;
  double entropy_coef = 0.003;
  std::vector<int> hidden = {64, 64};
  double log_std_init = -1.0;

  // Off-policy baseline.
  double tau = 0.005;
  long replay_capacity = 100000;
  int batch_size = 256;
  long warmup = 1024;
  int update_every = 16;  // transitions per gradient step
  double sigma_start = 0.3, sigma_end = 0.05;
  double temp_start = 1.0, temp_end = 0.5;

  // Test hooks (sequential trainer).
  bool happo_force_m_one = false;
  bool happo_fixed_order = false;
};

// Throws ConfigError naming the offending field: gamma in (0,1), lam in [0,1],
// clip_eps > 0, tau in (0,1], positive sizes/intervals, known algo.
void validate(const TrainConfig& tc);

// JSON with exactly the field names above; missing keys keep defaults,
// unknown keys throw ConfigError.
TrainConfig parse_train_json(const std::string& text);
TrainConfig load_train_file(const std::string& path);

struct EvalPoint {
  long step = 0;
  double avg_energy = 0.0;  // J per MU per slot
  double fail_ratio = 0.0;  // failures / requests (0 when no requests)
  double reward = 0.0;      // mean per slot
  double actor_loss = 0.0;  // from the latest update (0 at step 0)
  double critic_loss = 0.0;
  double entropy = 0.0;
};

struct TrainRunResult {
  std::vector<EvalPoint> points;
  long head_clips = 0;      // Gaussian exec clips during collection
  long cont_samples = 0;    // continuous scalars sampled during collection
  long env_steps = 0;
};

// Deterministic-policy evaluation over `episodes` fixed-seed episodes.
struct EvalMetrics {
  double avg_energy = 0.0;
  double fail_ratio = 0.0;
  double reward = 0.0;
};

// csv, when given, receives a header plus one row per evaluation point:
//   step,algorithm,seed,avg_energy_J,failure_ratio,reward,
//   actor_loss,critic_loss,entropy
// checkpoint_path, when non-empty, receives the final parameters.
TrainRunResult train_run(const ScenarioConfig& scn, const TrainConfig& tc,
                         std::uint64_t run_seed, std::ostream* csv,
                         const std::string& checkpoint_path = "");

// Evaluate a policy-gradient trainer's current deterministic policy.
EvalMetrics evaluate_policy(const PgTrainer& trainer, const ScenarioConfig& scn,
                            std::uint64_t eval_seed, int episodes);
EvalMetrics evaluate_policy(const MaddpgTrainer& trainer,
                            const ScenarioConfig& scn, std::uint64_t eval_seed,
                            int episodes);

// Restore a trainer from a checkpoint file (shape-checked).
void load_into(PgTrainer& trainer, const std::string& path);
void load_into(MaddpgTrainer& trainer, const std::string& path);

// Child seed for an independent concern, stable across runs.
std::uint64_t child_seed(std::uint64_t seed, std::string_view label);

}  // namespace wdtn
