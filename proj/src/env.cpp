#include "wdtn/env.hpp"

#include <cassert>
#include <cmath>

#include "wdtn/channel.hpp"
#include "wdtn/dt_sync.hpp"
#include "wdtn/mobility.hpp"

namespace wdtn {
namespace {

double speed_scale(const ScenarioConfig& cfg) {
  return cfg.mobility.mean_speed > 0.0 ? cfg.mobility.mean_speed : 1.0;
}

}  // namespace

std::vector<AgentSpec> agent_specs(const ScenarioConfig& cfg) {
  std::vector<AgentSpec> specs;
  if (cfg.n_mus == 0) return specs;  // nothing to act on
  int mu_obs = 4 + 3 * cfg.n_bss;
  int bs_obs = 3 + 4 * cfg.n_mus;
  int ctrl_obs = cfg.n_mus * (3 + cfg.n_bss) + cfg.n_bss;
  for (int i = 0; i < cfg.n_mus; ++i)
    specs.push_back({AgentKind::Mu, i, mu_obs, 1, 0});
  for (int b = 0; b < cfg.n_bss; ++b)
    specs.push_back({AgentKind::Bs, b, bs_obs, cfg.n_mus, 0});
  specs.push_back({AgentKind::Controller, 0, ctrl_obs, cfg.n_mus, cfg.n_bss});
  return specs;
}

int global_state_dim(const ScenarioConfig& cfg) {
  return cfg.n_mus * (5 + 2 * cfg.n_bss) + 3 * cfg.n_bss;
}

Observations build_observations(const WorldState& w, const ScenarioConfig& cfg) {
  Observations o;
  const double side = cfg.area_side;
  const double sp = speed_scale(cfg);
  const int n = cfg.n_mus;
  const int m = cfg.n_bss;

  auto specs = agent_specs(cfg);
  o.per_agent.reserve(specs.size());
  for (const AgentSpec& s : specs) {
    std::vector<double> v;
    v.reserve(static_cast<size_t>(s.obs_dim));
    if (s.kind == AgentKind::Mu) {
      const MuState& mu = w.mus[s.member];
      const DigitalTwinRecord& tw = w.twins[s.member];
      v.push_back(mu.pos.x / side);
      v.push_back(mu.pos.y / side);
      v.push_back(mu.speed / sp);
      for (int b = 0; b < m; ++b) v.push_back(tw.host_bs == b ? 1.0 : 0.0);
      v.push_back(mu.has_request ? 1.0 : 0.0);
      for (int b = 0; b < m; ++b) {
        v.push_back(w.bss[b].pos.x / side);
        v.push_back(w.bss[b].pos.y / side);
      }
    } else if (s.kind == AgentKind::Bs) {
      const BsState& bs = w.bss[s.member];
      v.push_back(bs.pos.x / side);
      v.push_back(bs.pos.y / side);
      v.push_back(1.0 - bs.allocated_total() / cfg.server_capacity);
      for (int i = 0; i < n; ++i) {
        v.push_back(w.mus[i].pos.x / side);
        v.push_back(w.mus[i].pos.y / side);
        v.push_back(w.mus[i].has_request ? 1.0 : 0.0);
        v.push_back(w.mus[i].associated_bs == s.member ? 1.0 : 0.0);
      }
    } else {
      for (int i = 0; i < n; ++i) {
        v.push_back(w.mus[i].pos.x / side);
        v.push_back(w.mus[i].pos.y / side);
      }
      for (int i = 0; i < n; ++i)
        for (int b = 0; b < m; ++b)
          v.push_back(w.twins[i].host_bs == b ? 1.0 : 0.0);
      for (int i = 0; i < n; ++i)
        v.push_back(w.twins[i].lifecycle == TwinLifecycle::Migrating ? 1.0 : 0.0);
      for (int b = 0; b < m; ++b)
        v.push_back(w.bss[b].allocated_total() / cfg.server_capacity);
    }
    assert(static_cast<int>(v.size()) == s.obs_dim);
    o.per_agent.push_back(std::move(v));
  }

  o.global_state.reserve(static_cast<size_t>(global_state_dim(cfg)));
  for (int i = 0; i < n; ++i) {
    const MuState& mu = w.mus[i];
    const DigitalTwinRecord& tw = w.twins[i];
    o.global_state.push_back(mu.pos.x / side);
    o.global_state.push_back(mu.pos.y / side);
    o.global_state.push_back(mu.speed / sp);
    o.global_state.push_back(mu.has_request ? 1.0 : 0.0);
    for (int b = 0; b < m; ++b)
      o.global_state.push_back(mu.associated_bs == b ? 1.0 : 0.0);
    for (int b = 0; b < m; ++b)
      o.global_state.push_back(tw.host_bs == b ? 1.0 : 0.0);
    o.global_state.push_back(tw.lifecycle == TwinLifecycle::Migrating ? 1.0 : 0.0);
  }
  for (int b = 0; b < m; ++b) {
    o.global_state.push_back(w.bss[b].pos.x / side);
    o.global_state.push_back(w.bss[b].pos.y / side);
    o.global_state.push_back(w.bss[b].allocated_total() / cfg.server_capacity);
  }
  assert(static_cast<int>(o.global_state.size()) == global_state_dim(cfg));
  return o;
}

DecodedActions decode_actions(const ActionSet& raw, const WorldState& w,
                              const ScenarioConfig& cfg) {
  auto specs = agent_specs(cfg);
  assert(raw.size() == specs.size());
  const int n = cfg.n_mus;
  const int m = cfg.n_bss;

  DecodedActions d;
  d.tx_power.assign(static_cast<size_t>(n), 0.0);
  d.alloc.assign(static_cast<size_t>(m),
                 std::vector<double>(static_cast<size_t>(n), 0.0));
  d.migrate_target.assign(static_cast<size_t>(n), 0);

  auto clamp01 = [&d](double x) {
    if (x < 1e-6 || x > 1.0 - 1e-6) {
      ++d.clipped;
      return x < 1e-6 ? 1e-6 : 1.0 - 1e-6;
    }
    return x;
  };

  for (size_t a = 0; a < specs.size(); ++a) {
    const AgentSpec& s = specs[a];
    assert(static_cast<int>(raw[a].size()) == s.act_dim);
    if (s.kind == AgentKind::Mu) {
      double u = clamp01(raw[a][0]);
      d.tx_power[s.member] = cfg.p_min + u * (cfg.p_max - cfg.p_min);
    } else if (s.kind == AgentKind::Bs) {
      // Weights count only for MUs hosted here with a request this slot.
      std::vector<int> served;
      std::vector<double> weight;
      double wsum = 0.0;
      for (int i = 0; i < n; ++i) {
        if (w.twins[i].host_bs != s.member || !w.mus[i].has_request) continue;
        served.push_back(i);
        weight.push_back(clamp01(raw[a][i]));
        wsum += weight.back();
      }
      for (size_t k = 0; k < served.size(); ++k) {
        double share = wsum > 0.0 ? weight[k] / wsum
                                  : 1.0 / static_cast<double>(served.size());
        d.alloc[s.member][served[k]] = cfg.server_capacity * share;
      }
    } else {
      for (int i = 0; i < n; ++i) {
        int t = static_cast<int>(raw[a][i]);
        assert(t >= 0 && t < m);
        d.migrate_target[i] = t;
      }
    }
  }
  return d;
}

double compute_reward(const SlotMetrics& mtr, const ScenarioConfig& cfg) {
  return -mtr.total_energy() / cfg.energy_norm - cfg.eta * mtr.failures;
}

Environment::Environment(const ScenarioConfig& cfg, std::uint64_t env_seed)
    : cfg_(cfg), env_seed_(env_seed) {
  validate(cfg_);
  reset();
}

void Environment::reset() {
  std::uint64_t ep_seed =
      splitmix64(env_seed_ ^ splitmix64(static_cast<std::uint64_t>(episode_)));
  world_ = init_world(cfg_, ep_seed);
  ++episode_;
}

StepRecord Environment::step(const ActionSet& actions) {
  const int n = cfg_.n_mus;
  StepRecord rec;
  rec.obs = observe();
  rec.actions = actions;

  // (1) decode; allocations become the BSs' published load for this slot
  DecodedActions d = decode_actions(actions, world_, cfg_);
  clip_count_ += d.clipped;
  for (int b = 0; b < cfg_.n_bss; ++b) {
    world_.bss[b].alloc = d.alloc[b];
    assert(world_.bss[b].allocated_total() <=
           cfg_.server_capacity * (1.0 + 1e-9));
  }

  // (2) controller decisions take effect before anything moves
  if (!d.migrate_target.empty())
    for (int i = 0; i < n; ++i)
      decide_migration(world_.twins[i], d.migrate_target[i], cfg_);

  // (3) kinematics, then re-associate
  for (int i = 0; i < n; ++i) {
    MuState& mu = world_.mus[i];
    Kinematics k = step_kinematics(mu.speed, mu.direction, mu.mean_direction,
                                   cfg_.mobility, world_.streams.mobility);
    Moved mv = step_position(mu.pos, k.speed, k.direction, cfg_.slot_duration,
                             cfg_.area_side);
    mu.speed = k.speed;
    mu.direction = mv.direction;
    mu.pos = mv.pos;
    mu.associated_bs = associate(mu.pos, world_.bss);
  }

  // (4) requests for the coming slot (staged until phase 9)
  std::vector<bool> next_flags =
      draw_requests(n, cfg_.request_prob, world_.streams.traffic);

  // (5) channels for this slot's transmitters
  std::vector<bool> transmitting(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) transmitting[i] = world_.mus[i].has_request;
  GainTable gains = sample_gain_table(world_.mus, world_.bss, transmitting,
                                      cfg_, world_.streams.channel);
  std::vector<double> rate(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    if (!transmitting[i]) continue;
    double sinr = uplink_sinr(gains, d.tx_power, transmitting, i,
                              world_.mus[i].associated_bs, cfg_.noise_power);
    rate[i] = achievable_rate(sinr, cfg_.bandwidth);
  }

  // (6) synchronization outcomes
  SlotMetrics& mtr = rec.metrics;
  mtr.slot_index = world_.slot_index;
  mtr.energy.assign(static_cast<size_t>(n), 0.0);
  mtr.outcome.assign(static_cast<size_t>(n), SyncOutcome{});
  for (int i = 0; i < n; ++i) {
    if (!transmitting[i]) continue;
    double alloc = world_.bss[world_.twins[i].host_bs].alloc[i];
    SyncOutcome out =
        evaluate_sync(d.tx_power[i], world_.twins[i], rate[i], alloc, cfg_);
    mtr.outcome[i] = out;
    mtr.energy[i] = out.energy;
    ++mtr.requests;
    if (is_failure(out.kind)) ++mtr.failures;
  }
  mtr.utilization.resize(static_cast<size_t>(cfg_.n_bss));
  for (int b = 0; b < cfg_.n_bss; ++b)
    mtr.utilization[b] = world_.bss[b].allocated_total() / cfg_.server_capacity;

  // (7) migration clocks tick at slot end
  advance_migrations(world_.twins);

  // (8) shared reward
  rec.reward = compute_reward(mtr, cfg_);
  assert(std::isfinite(rec.reward));

  // (9) commit staged flags and advance time
  for (int i = 0; i < n; ++i) world_.mus[i].has_request = next_flags[i];
  ++world_.slot_index;
  rec.done = world_.slot_index >= cfg_.horizon_slots;
  return rec;
}

}  // namespace wdtn
