#pragma once
// World construction and the per-run random streams.

#include <vector>

#include "wdtn/config.hpp"
#include "wdtn/rng.hpp"
#include "wdtn/types.hpp"

namespace wdtn {

struct RngStreams {
  RngStream mobility;
  RngStream channel;
  RngStream traffic;
  RngStream policy;  // action sampling during rollouts
};

RngStreams make_streams(std::uint64_t seed);

struct WorldState {
  long slot_index = 0;
  std::vector<MuState> mus;
  std::vector<BsState> bss;
  std::vector<DigitalTwinRecord> twins;
  RngStreams streams;
};

// Deterministic BS layout: BS 0 at the centre, the rest evenly spaced on a
// circle of radius area_side/3.
std::vector<Vec2> bs_layout(const ScenarioConfig& cfg);

// Draw order (part of the reproducibility contract):
//   mobility stream, per MU ascending id: x, y, direction (uniform);
//     initial speed := mean_speed, direction memory := initial direction.
//   traffic stream, per MU ascending id: Bernoulli(request_prob) slot-0 flag.
// Twins start Active at the MU's nearest BS (lowest index wins ties).
// The one-argument overload seeds the streams from cfg.seed.
WorldState init_world(const ScenarioConfig& cfg);
WorldState init_world(const ScenarioConfig& cfg, std::uint64_t stream_seed);

}  // namespace wdtn
