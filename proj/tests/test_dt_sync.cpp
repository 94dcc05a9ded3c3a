#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "wdtn/dt_sync.hpp"

using namespace wdtn;

namespace {

ScenarioConfig sync_cfg() {
  ScenarioConfig cfg;
  cfg.sync_data_size = 1e6;       // bits
  cfg.cycles_per_bit = 100.0;
  cfg.latency_deadline = 0.5;     // s
  return cfg;
}

DigitalTwinRecord active_twin() {
  DigitalTwinRecord t;
  t.mu_id = 0;
  t.host_bs = 0;
  t.lifecycle = TwinLifecycle::Active;
  return t;
}

}  // namespace

TEST_CASE("success when upload + compute meet the deadline") {
  ScenarioConfig cfg = sync_cfg();
  DigitalTwinRecord twin = active_twin();
  // upload = 1e6/4e6 = 0.25 s, compute = 1e8/8e8 = 0.125 s, total 0.375 <= 0.5
  SyncOutcome o = evaluate_sync(0.8, twin, 4e6, 8e8, cfg);
  CHECK(o.kind == OutcomeKind::Success);
  CHECK(o.latency == doctest::Approx(0.375));
  CHECK(o.energy == doctest::Approx(0.8 * 0.25));
  CHECK_FALSE(is_failure(o.kind));
}

TEST_CASE("deadline miss pays for the upload up to the deadline") {
  ScenarioConfig cfg = sync_cfg();
  DigitalTwinRecord twin = active_twin();

  SUBCASE("slow radio: upload alone blows the budget") {
    // upload = 1e6/1e6 = 1.0 s > 0.5; transmitter stops at the deadline.
    SyncOutcome o = evaluate_sync(0.6, twin, 1e6, 8e8, cfg);
    CHECK(o.kind == OutcomeKind::FailDeadline);
    CHECK(o.latency == doctest::Approx(1.0 + 1e8 / 8e8));
    CHECK(o.energy == doctest::Approx(0.6 * 0.5));  // p * deadline
  }

  SUBCASE("fast radio, starved compute: full upload energy is spent") {
    // upload = 0.125 s, compute = 1e8/1e8 = 1.0 s, total > deadline.
    SyncOutcome o = evaluate_sync(0.6, twin, 8e6, 1e8, cfg);
    CHECK(o.kind == OutcomeKind::FailDeadline);
    CHECK(o.energy == doctest::Approx(0.6 * 0.125));  // p * upload
  }

  SUBCASE("zero rate: infinite upload, energy capped at the deadline") {
    SyncOutcome o = evaluate_sync(0.6, twin, 0.0, 8e8, cfg);
    CHECK(o.kind == OutcomeKind::FailDeadline);
    CHECK(std::isinf(o.latency));
    CHECK(o.energy == doctest::Approx(0.6 * 0.5));
  }

  SUBCASE("zero compute allocation: infinite compute time") {
    SyncOutcome o = evaluate_sync(0.6, twin, 8e6, 0.0, cfg);
    CHECK(o.kind == OutcomeKind::FailDeadline);
    CHECK(std::isinf(o.latency));
    CHECK(o.energy == doctest::Approx(0.6 * 0.125));  // upload finished
  }
}

TEST_CASE("requests against a migrating twin fail and pay the deadline") {
  ScenarioConfig cfg = sync_cfg();
  DigitalTwinRecord twin = active_twin();
  twin.lifecycle = TwinLifecycle::Migrating;
  twin.target_bs = 1;
  twin.remaining_slots = 3;
  SyncOutcome o = evaluate_sync(0.4, twin, 1e9, 1e12, cfg);  // rates irrelevant
  CHECK(o.kind == OutcomeKind::FailMigrating);
  CHECK(o.energy == doctest::Approx(0.4 * 0.5));
  CHECK(is_failure(o.kind));
}

TEST_CASE("exactly hitting the deadline counts as success") {
  ScenarioConfig cfg = sync_cfg();
  DigitalTwinRecord twin = active_twin();
  // upload = 0.25, compute = 1e8/4e8 = 0.25, total exactly 0.5.
  SyncOutcome o = evaluate_sync(1.0, twin, 4e6, 4e8, cfg);
  CHECK(o.kind == OutcomeKind::Success);
  CHECK(o.latency == doctest::Approx(0.5));
}

TEST_CASE("migration decisions start, dedupe, and complete") {
  ScenarioConfig cfg = sync_cfg();
  cfg.migration_duration = 3;

  DigitalTwinRecord twin = active_twin();  // hosted at BS0

  SUBCASE("same-host target is a no-op") {
    decide_migration(twin, 0, cfg);
    CHECK(twin.lifecycle == TwinLifecycle::Active);
  }

  SUBCASE("full migration trace") {
    decide_migration(twin, 2, cfg);
    CHECK(twin.lifecycle == TwinLifecycle::Migrating);
    CHECK(twin.target_bs == 2);
    CHECK(twin.remaining_slots == 3);
    CHECK(twin.host_bs == 0);  // still hosted at origin while in flight

    // a new decision while migrating is ignored
    decide_migration(twin, 1, cfg);
    CHECK(twin.target_bs == 2);
    CHECK(twin.remaining_slots == 3);

    std::vector<DigitalTwinRecord> twins = {twin};
    advance_migrations(twins);
    CHECK(twins[0].remaining_slots == 2);
    CHECK(twins[0].lifecycle == TwinLifecycle::Migrating);
    advance_migrations(twins);
    advance_migrations(twins);
    CHECK(twins[0].lifecycle == TwinLifecycle::Active);
    CHECK(twins[0].host_bs == 2);
  }
}

TEST_CASE("association picks the nearest BS, lowest index on ties") {
  std::vector<BsState> bss(3);
  bss[0].pos = {0.0, 0.0};
  bss[1].pos = {100.0, 0.0};
  bss[2].pos = {50.0, 50.0};
  CHECK(associate({10.0, 0.0}, bss) == 0);
  CHECK(associate({90.0, 0.0}, bss) == 1);
  CHECK(associate({50.0, 40.0}, bss) == 2);
  CHECK(associate({50.0, 0.0}, bss) == 0);  // BS0 and BS1 tie at 50 m
}

TEST_CASE("request draws are Bernoulli per MU in ascending order") {
  RngStream a = split_stream(20, "traffic");
  RngStream b = split_stream(20, "traffic");
  std::vector<bool> flags = draw_requests(5, 0.3, a);
  REQUIRE(flags.size() == 5);
  for (int i = 0; i < 5; ++i) {
    bool want = b.uniform() < 0.3;
    CHECK(flags[i] == want);
  }

  // frequency check
  RngStream r = split_stream(21, "traffic");
  int hits = 0;
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    std::vector<bool> f = draw_requests(1, 0.3, r);
    if (f[0]) ++hits;
  }
  CHECK(double(hits) / N == doctest::Approx(0.3).epsilon(0.02));

  // degenerate probabilities
  RngStream r0 = split_stream(22, "traffic");
  for (bool f : draw_requests(100, 0.0, r0)) CHECK_FALSE(f);
  for (bool f : draw_requests(100, 1.0, r0)) CHECK(f);
}
