#pragma once
// Digital-twin synchronization: request arrivals, association, the
// success/failure rules, and twin migration bookkeeping.

#include <vector>

#include "wdtn/config.hpp"
#include "wdtn/rng.hpp"
#include "wdtn/types.hpp"

namespace wdtn {

// One Bernoulli(request_prob) draw per MU, ascending id.
std::vector<bool> draw_requests(int n_mus, double request_prob, RngStream& traffic);

// Index of the nearest BS (Euclidean), lowest index on ties. bss non-empty.
int associate(const Vec2& mu_pos, const std::vector<BsState>& bss);

// Outcome of one synchronization request.
//   Twin migrating                    -> FailMigrating, energy p*deadline
//   upload + compute > deadline       -> FailDeadline,  energy p*min(deadline, upload)
//   otherwise                         -> Success,       energy p*upload
// upload = sync_data_size/rate (inf when rate == 0);
// compute = sync_data_size*cycles_per_bit/cycles_alloc (inf when alloc == 0).
SyncOutcome evaluate_sync(double tx_power, const DigitalTwinRecord& twin,
                          double rate, double cycles_alloc,
                          const ScenarioConfig& cfg);

// Start a migration towards target_bs unless the twin is already migrating or
// already hosted there.
void decide_migration(DigitalTwinRecord& twin, int target_bs,
                      const ScenarioConfig& cfg);

// Tick every migrating twin down one slot; on reaching zero the twin becomes
// Active at its target. A twin started this slot therefore blocks requests for
// exactly migration_duration slots.
void advance_migrations(std::vector<DigitalTwinRecord>& twins);

}  // namespace wdtn
