#include "wdtn/dt_sync.hpp"

#include <cassert>
#include <limits>

namespace wdtn {

std::vector<bool> draw_requests(int n_mus, double request_prob,
                                RngStream& traffic) {
  std::vector<bool> flags(static_cast<size_t>(n_mus));
  for (int i = 0; i < n_mus; ++i) flags[i] = traffic.bernoulli(request_prob);
  return flags;
}

int associate(const Vec2& mu_pos, const std::vector<BsState>& bss) {
  assert(!bss.empty());
  int best = 0;
  double best_d = distance(mu_pos, bss[0].pos);
  for (size_t b = 1; b < bss.size(); ++b) {
    double d = distance(mu_pos, bss[b].pos);
    if (d < best_d) {  // strict: lowest index wins ties
      best_d = d;
      best = static_cast<int>(b);
    }
  }
  return best;
}

SyncOutcome evaluate_sync(double tx_power, const DigitalTwinRecord& twin,
                          double rate, double cycles_alloc,
                          const ScenarioConfig& cfg) {
  SyncOutcome out;
  if (twin.lifecycle == TwinLifecycle::Migrating) {
    out.kind = OutcomeKind::FailMigrating;
    out.energy = tx_power * cfg.latency_deadline;
    return out;
  }
  const double inf = std::numeric_limits<double>::infinity();
  double upload = rate > 0.0 ? cfg.sync_data_size / rate : inf;
  double compute = cycles_alloc > 0.0
                       ? cfg.sync_data_size * cfg.cycles_per_bit / cycles_alloc
                       : inf;
  double latency = upload + compute;
  if (latency > cfg.latency_deadline) {
    out.kind = OutcomeKind::FailDeadline;
    out.latency = latency;
    out.energy = tx_power * std::min(cfg.latency_deadline, upload);
    return out;
  }
  out.kind = OutcomeKind::Success;
  out.latency = latency;
  out.energy = tx_power * upload;
  return out;
}

void decide_migration(DigitalTwinRecord& twin, int target_bs,
                      const ScenarioConfig& cfg) {
  if (twin.lifecycle == TwinLifecycle::Migrating) return;
  if (target_bs == twin.host_bs) return;
  twin.lifecycle = TwinLifecycle::Migrating;
  twin.target_bs = target_bs;
  twin.remaining_slots = cfg.migration_duration;
}

void advance_migrations(std::vector<DigitalTwinRecord>& twins) {
  for (DigitalTwinRecord& t : twins) {
    if (t.lifecycle != TwinLifecycle::Migrating) continue;
    if (--t.remaining_slots == 0) {
      t.lifecycle = TwinLifecycle::Active;
      t.host_bs = t.target_bs;
    }
  }
}

}  // namespace wdtn
