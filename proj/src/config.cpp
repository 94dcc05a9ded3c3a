#include "wdtn/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace wdtn {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_known_keys(const json& j, const std::set<std::string>& known,
                      const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key()))
      fail("unknown config key '" + where + it.key() + "'");
  }
}

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(std::string("config key '") + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer())
    fail(std::string("config key '") + key + "' must be an integer");
  return v.get<int>();
}

}  // namespace

void validate(const ScenarioConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) fail(std::string("config field '") + name + "' must be > 0");
  };
  positive(c.area_side, "area_side");
  if (c.n_mus < 0) fail("config field 'n_mus' must be >= 0");
  if (c.n_bss < 1) fail("config field 'n_bss' must be >= 1");
  positive(c.slot_duration, "slot_duration");
  if (c.horizon_slots < 1) fail("config field 'horizon_slots' must be >= 1");
  positive(c.bandwidth, "bandwidth");
  positive(c.noise_power, "noise_power");
  if (c.rician_k < 0.0) fail("config field 'rician_k' must be >= 0");
  positive(c.pathloss_ref_gain, "pathloss_ref_gain");
  positive(c.pathloss_exponent, "pathloss_exponent");
  positive(c.p_min, "p_min");
  if (!(c.p_max > c.p_min)) fail("config field 'p_max' must be > p_min");
  positive(c.sync_data_size, "sync_data_size");
  positive(c.cycles_per_bit, "cycles_per_bit");
  positive(c.server_capacity, "server_capacity");
  positive(c.latency_deadline, "latency_deadline");
  if (c.request_prob < 0.0 || c.request_prob > 1.0)
    fail("config field 'request_prob' must be in [0,1]");
  if (c.migration_duration < 1)
    fail("config field 'migration_duration' must be >= 1");
  if (c.eta < 0.0) fail("config field 'eta' must be >= 0");
  positive(c.energy_norm, "energy_norm");
  const MobilityParams& m = c.mobility;
  if (m.alpha < 0.0 || m.alpha > 1.0)
    fail("config field 'mobility.alpha' must be in [0,1]");
  if (m.mean_speed < 0.0) fail("config field 'mobility.mean_speed' must be >= 0");
  if (m.speed_sigma < 0.0) fail("config field 'mobility.speed_sigma' must be >= 0");
  if (m.direction_sigma < 0.0)
    fail("config field 'mobility.direction_sigma' must be >= 0");
}

ScenarioConfig parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("config root must be a JSON object");

  static const std::set<std::string> known = {
      "area_side", "n_mus", "n_bss", "slot_duration", "horizon_slots",
      "bandwidth", "noise_power", "rician_k", "pathloss_ref_gain",
      "pathloss_exponent", "p_min", "p_max", "sync_data_size",
      "cycles_per_bit", "server_capacity", "latency_deadline",
      "request_prob", "migration_duration", "eta", "energy_norm",
      "mobility", "seed"};
  check_known_keys(j, known, "");

  ScenarioConfig c;
  c.area_side = get_num(j, "area_side", c.area_side);
  c.n_mus = get_int(j, "n_mus", c.n_mus);
  c.n_bss = get_int(j, "n_bss", c.n_bss);
  c.slot_duration = get_num(j, "slot_duration", c.slot_duration);
  c.horizon_slots = get_int(j, "horizon_slots", c.horizon_slots);
  c.bandwidth = get_num(j, "bandwidth", c.bandwidth);
  c.noise_power = get_num(j, "noise_power", c.noise_power);
  c.rician_k = get_num(j, "rician_k", c.rician_k);
  c.pathloss_ref_gain = get_num(j, "pathloss_ref_gain", c.pathloss_ref_gain);
  c.pathloss_exponent = get_num(j, "pathloss_exponent", c.pathloss_exponent);
  c.p_min = get_num(j, "p_min", c.p_min);
  c.p_max = get_num(j, "p_max", c.p_max);
  c.sync_data_size = get_num(j, "sync_data_size", c.sync_data_size);
  c.cycles_per_bit = get_num(j, "cycles_per_bit", c.cycles_per_bit);
  c.server_capacity = get_num(j, "server_capacity", c.server_capacity);
  c.latency_deadline = get_num(j, "latency_deadline", c.latency_deadline);
  c.request_prob = get_num(j, "request_prob", c.request_prob);
  c.migration_duration = get_int(j, "migration_duration", c.migration_duration);
  c.eta = get_num(j, "eta", c.eta);

  if (j.contains("mobility")) {
    const json& m = j.at("mobility");
    if (!m.is_object()) fail("config key 'mobility' must be an object");
    check_known_keys(
        m, {"alpha", "mean_speed", "speed_sigma", "direction_sigma"},
        "mobility.");
    c.mobility.alpha = get_num(m, "alpha", c.mobility.alpha);
    c.mobility.mean_speed = get_num(m, "mean_speed", c.mobility.mean_speed);
    c.mobility.speed_sigma = get_num(m, "speed_sigma", c.mobility.speed_sigma);
    c.mobility.direction_sigma =
        get_num(m, "direction_sigma", c.mobility.direction_sigma);
  }
  if (j.contains("seed")) {
    const json& v = j.at("seed");
    if (!v.is_number_unsigned() && !v.is_number_integer())
      fail("config key 'seed' must be an integer");
    c.seed = v.get<std::uint64_t>();
  }
  // Default: full-power transmission for one deadline.
  c.energy_norm = get_num(j, "energy_norm", c.p_max * c.latency_deadline);

  validate(c);
  return c;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_json(ss.str());
}

}  // namespace wdtn
