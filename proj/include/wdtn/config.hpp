#pragma once
// Scenario configuration: every physical and experiment constant in one place.
// JSON files mirror the field names exactly; unknown keys are a hard error so
// typos cannot silently fall back to defaults.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wdtn {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MobilityParams {
  double alpha = 0.85;         // Gauss-Markov memory in [0,1]
  double mean_speed = 1.5;     // m/s
  double speed_sigma = 0.5;    // m/s
  double direction_sigma = 0.5;  // rad
};

struct ScenarioConfig {
  double area_side = 1000.0;   // m, square world
  int n_mus = 30;
  int n_bss = 5;
  double slot_duration = 0.1;  // s
  int horizon_slots = 200;     // slots per episode

  double bandwidth = 1e6;          // Hz, shared uplink band
  double noise_power = 1e-13;      // W over the whole band
  double rician_k = 3.0;           // LOS-to-scatter power ratio
  double pathloss_ref_gain = 1e-3; // gain at 1 m
  double pathloss_exponent = 3.0;
  double p_min = 0.01;             // W
  double p_max = 1.0;              // W

  double sync_data_size = 1e6;   // bits per synchronization request
  double cycles_per_bit = 100.0;
  double server_capacity = 2e10; // cycles/s per BS edge server
  double latency_deadline = 0.5; // s
  double request_prob = 0.3;     // Bernoulli per MU per slot
  int migration_duration = 5;    // slots a migration keeps the twin unavailable

  double eta = 1.0;          // failure weight in the reward
  double energy_norm = 0.5;  // J; reward divides energy by this (default p_max*deadline)

  MobilityParams mobility;
  std::uint64_t seed = 1;
};

// Throws ConfigError naming the offending field.
void validate(const ScenarioConfig& cfg);

// Parse from JSON text / load from a file. Missing keys keep defaults (with
// energy_norm defaulting to p_max*latency_deadline when absent); unknown keys
// throw ConfigError.
ScenarioConfig parse_scenario_json(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);

}  // namespace wdtn
