#pragma once
// Plain data types shared across the simulator.

#include <cmath>
#include <vector>

namespace wdtn {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct MuState {
  int id = 0;
  Vec2 pos;
  double speed = 0.0;           // m/s
  double direction = 0.0;       // rad, unnormalised
  double mean_direction = 0.0;  // fixed Gauss-Markov direction memory
  int associated_bs = 0;        // nearest BS, updated after each move
  bool has_request = false;     // synchronization request in the current slot
};

struct BsState {
  int id = 0;
  Vec2 pos;
  // cycles/s granted per MU in the current slot (sums to <= server_capacity).
  std::vector<double> alloc;

  double allocated_total() const {
    double s = 0.0;
    for (double a : alloc) s += a;
    return s;
  }
};

enum class TwinLifecycle { Active, Migrating };

struct DigitalTwinRecord {
  int mu_id = 0;
  int host_bs = 0;  // stays at the old host until a migration completes
  TwinLifecycle lifecycle = TwinLifecycle::Active;
  int target_bs = 0;
  int remaining_slots = 0;  // > 0 iff Migrating
};

enum class OutcomeKind { NoRequest, Success, FailMigrating, FailDeadline };

struct SyncOutcome {
  OutcomeKind kind = OutcomeKind::NoRequest;
  double latency = 0.0;  // s, meaningful for Success
  double energy = 0.0;   // J spent transmitting this slot
};

inline bool is_failure(OutcomeKind k) {
  return k == OutcomeKind::FailMigrating || k == OutcomeKind::FailDeadline;
}

struct SlotMetrics {
  long slot_index = 0;
  std::vector<double> energy;        // J per MU
  std::vector<SyncOutcome> outcome;  // per MU
  std::vector<double> utilization;   // per BS, fraction of server_capacity
  int requests = 0;
  int failures = 0;

  double total_energy() const {
    double s = 0.0;
    for (double e : energy) s += e;
    return s;
  }
};

}  // namespace wdtn
