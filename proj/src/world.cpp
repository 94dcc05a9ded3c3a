#include "wdtn/world.hpp"

#include <cmath>
#include <numbers>

#include "wdtn/dt_sync.hpp"

namespace wdtn {

RngStreams make_streams(std::uint64_t seed) {
  RngStreams s;
  s.mobility = split_stream(seed, "mobility");
  s.channel = split_stream(seed, "channel");
  s.traffic = split_stream(seed, "traffic");
  s.policy = split_stream(seed, "policy");
  return s;
}

std::vector<Vec2> bs_layout(const ScenarioConfig& cfg) {
  std::vector<Vec2> pos(static_cast<size_t>(cfg.n_bss));
  double c = cfg.area_side / 2.0;
  pos[0] = {c, c};
  int ring = cfg.n_bss - 1;
  double r = cfg.area_side / 3.0;
  for (int k = 0; k < ring; ++k) {
    double a = 2.0 * std::numbers::pi * k / ring;
    pos[static_cast<size_t>(k) + 1] = {c + r * std::cos(a), c + r * std::sin(a)};
  }
  return pos;
}

WorldState init_world(const ScenarioConfig& cfg) {
  return init_world(cfg, cfg.seed);
}

WorldState init_world(const ScenarioConfig& cfg, std::uint64_t stream_seed) {
  WorldState w;
  w.streams = make_streams(stream_seed);

  std::vector<Vec2> layout = bs_layout(cfg);
  w.bss.resize(static_cast<size_t>(cfg.n_bss));
  for (int b = 0; b < cfg.n_bss; ++b) {
    w.bss[b].id = b;
    w.bss[b].pos = layout[b];
    w.bss[b].alloc.assign(static_cast<size_t>(cfg.n_mus), 0.0);
  }

  w.mus.resize(static_cast<size_t>(cfg.n_mus));
  w.twins.resize(static_cast<size_t>(cfg.n_mus));
  for (int i = 0; i < cfg.n_mus; ++i) {
    MuState& m = w.mus[i];
    m.id = i;
    m.pos.x = w.streams.mobility.uniform(0.0, cfg.area_side);
    m.pos.y = w.streams.mobility.uniform(0.0, cfg.area_side);
    m.direction = w.streams.mobility.uniform(0.0, 2.0 * std::numbers::pi);
    m.mean_direction = m.direction;
    m.speed = cfg.mobility.mean_speed;
    m.associated_bs = associate(m.pos, w.bss);

    DigitalTwinRecord& t = w.twins[i];
    t.mu_id = i;
    t.host_bs = m.associated_bs;
    t.lifecycle = TwinLifecycle::Active;
    t.target_bs = t.host_bs;
    t.remaining_slots = 0;
  }
  for (int i = 0; i < cfg.n_mus; ++i)
    w.mus[i].has_request = w.streams.traffic.bernoulli(cfg.request_prob);
  return w;
}

}  // namespace wdtn
