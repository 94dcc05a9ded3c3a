// Multi-agent training stack: advantage estimation, the clipped-surrogate
// core, the sequential correction factor, parameter sharing, replay, the
// off-policy baseline, checkpoints, and the training driver. Every derived
// quantity is checked against an independent oracle (double sums, scalar
// loops, re-derived ratios, binomial frequency bounds).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "wdtn/config.hpp"
#include "wdtn/env.hpp"
#include "wdtn/marl/checkpoint.hpp"
#include "wdtn/marl/maddpg.hpp"
#include "wdtn/marl/policy.hpp"
#include "wdtn/marl/ppo.hpp"
#include "wdtn/marl/replay.hpp"
#include "wdtn/marl/rollout.hpp"
#include "wdtn/marl/train.hpp"
#include "wdtn/marl/trainers.hpp"

using namespace wdtn;

namespace {

ScenarioConfig tiny_scenario(int n_mus, int n_bss) {
  ScenarioConfig cfg;
  cfg.n_mus = n_mus;
  cfg.n_bss = n_bss;
  cfg.horizon_slots = 20;
  cfg.request_prob = 0.4;
  cfg.migration_duration = 2;
  cfg.energy_norm = cfg.p_max * cfg.latency_deadline;
  return cfg;
}

// Independent double-sum advantage oracle:
//   A_t = sum_{l>=0} (gamma*lam)^l * delta_{t+l}, the sum cut at terminals.
void gae_double_sum(const std::vector<double>& r,
                    const std::vector<double>& v,
                    const std::vector<double>& d, double gamma, double lam,
                    std::vector<double>& adv) {
  const size_t T = r.size();
  adv.assign(T, 0.0);
  for (size_t t = 0; t < T; ++t) {
    double coef = 1.0;
    double acc = 0.0;
    for (size_t l = t; l < T; ++l) {
      const double delta = r[l] + gamma * v[l + 1] * (1.0 - d[l]) - v[l];
      acc += coef * delta;
      if (d[l] > 0.5) break;
      coef *= gamma * lam;
    }
    adv[t] = acc;
  }
}

// A synthetic on-policy buffer for a trainer: random observations, actions
// sampled from the current policies, log-probs evaluated by the same nets
// (so every ratio starts at exactly 1).
RolloutBuffer synthetic_buffer(const PgTrainer& trainer, int rows,
                               std::uint64_t seed) {
  const std::vector<AgentSpec>& specs = trainer.specs();
  const std::vector<int>& map = trainer.agent_actor();
  const int A = static_cast<int>(specs.size());
  RolloutBuffer buf;
  buf.n_envs = 1;
  buf.steps = rows;
  RngStream rng(seed);
  const int S = trainer.critics()[0].in_dim();
  buf.state = Matrix(rows, S);
  for (double& x : buf.state.a) x = rng.uniform(-1.0, 1.0);
  buf.final_state = Matrix(1, S);
  for (double& x : buf.final_state.a) x = rng.uniform(-1.0, 1.0);
  buf.boundary_state = Matrix(rows, S);  // all-zero: no time-limit cuts here
  buf.obs.resize(A);
  buf.raw.resize(A);
  buf.logp.assign(A, std::vector<double>(rows, 0.0));
  buf.value.assign(A, std::vector<double>(rows, 0.0));
  buf.reward.assign(rows, 0.0);
  buf.done.assign(rows, 0.0);
  for (int a = 0; a < A; ++a) {
    const ActorPolicy& pol = trainer.actors()[map[a]];
    buf.obs[a] = Matrix(rows, specs[a].obs_dim);
    for (double& x : buf.obs[a].a) x = rng.uniform(-1.0, 1.0);
    buf.raw[a] = Matrix(rows, specs[a].act_dim);
    for (int r = 0; r < rows; ++r) {
      for (int dd = 0; dd < specs[a].act_dim; ++dd) {
        buf.raw[a].at(r, dd) = pol.head == HeadKind::Cat
                                   ? static_cast<double>(rng.uniform_int(
                                         specs[a].n_cats))
                                   : rng.uniform(0.1, 0.9);
      }
    }
    const ActorEval ev = actor_eval(pol, buf.obs[a], buf.raw[a]);
    buf.logp[a] = ev.logp;
  }
  return buf;
}

bool blobs_equal(const BlobList& x, const BlobList& y) {
  if (x.size() != y.size()) return false;
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i].first != y[i].first || x[i].second != y[i].second) return false;
  return true;
}

}  // namespace

TEST_CASE("advantage estimation matches the closed form and the double sum") {
  SUBCASE("three unit rewards, zero values") {
    const std::vector<double> r = {1.0, 1.0, 1.0};
    const std::vector<double> v = {0.0, 0.0, 0.0, 0.0};
    const std::vector<double> d = {0.0, 0.0, 0.0};
    std::vector<double> adv, ret;
    compute_gae(r, v, d, 0.99, 0.95, adv, ret);
    const double gl = 0.99 * 0.95;
    CHECK(adv[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(adv[1] == doctest::Approx(1.0 + gl).epsilon(1e-15));
    CHECK(adv[0] == doctest::Approx(1.0 + gl + gl * gl).epsilon(1e-15));
    CHECK(adv[0] == doctest::Approx(2.82504025).epsilon(1e-9));
    for (size_t t = 0; t < r.size(); ++t)
      CHECK(ret[t] == doctest::Approx(adv[t] + v[t]).epsilon(1e-15));
  }
  SUBCASE("lambda = 0 gives the one-step TD residual") {
    RngStream rng(7);
    const int T = 17;
    std::vector<double> r(T), v(T + 1), d(T, 0.0), adv, ret;
    for (double& x : r) x = rng.uniform(-1.0, 1.0);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    d[5] = 1.0;
    compute_gae(r, v, d, 0.9, 0.0, adv, ret);
    for (int t = 0; t < T; ++t) {
      const double delta = r[t] + 0.9 * v[t + 1] * (1.0 - d[t]) - v[t];
      CHECK(adv[t] == doctest::Approx(delta).epsilon(1e-15));
    }
  }
  SUBCASE("random sequence matches the double-sum oracle to 1e-10") {
    RngStream rng(1234);
    const int T = 64;
    std::vector<double> r(T), v(T + 1), d(T), adv, ret, want;
    for (double& x : r) x = rng.uniform(-2.0, 2.0);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    for (double& x : d) x = rng.uniform() < 0.15 ? 1.0 : 0.0;
    d[T - 1] = 1.0;
    compute_gae(r, v, d, 0.99, 0.95, adv, ret);
    gae_double_sum(r, v, d, 0.99, 0.95, want);
    for (int t = 0; t < T; ++t)
      CHECK(adv[t] == doctest::Approx(want[t]).epsilon(1e-10));
  }
  SUBCASE("terminals cut the recursion") {
    const std::vector<double> r = {1.0, 1.0};
    const std::vector<double> v = {0.5, 0.25, 10.0};
    const std::vector<double> d = {1.0, 1.0};
    std::vector<double> adv, ret;
    compute_gae(r, v, d, 0.9, 0.9, adv, ret);
    // Every step is terminal: A_t = r_t - v_t, no bootstrap anywhere.
    CHECK(adv[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(adv[1] == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("time-limit cuts bootstrap through the boundary value") {
    // One cut in the middle with a known boundary state value. The recursion
    // must still stop at the cut, but the one-step residual there must use
    // the boundary value instead of zero.
    const std::vector<double> r = {1.0, 2.0, 3.0};
    const std::vector<double> v = {0.5, -0.25, 0.75, 1.25};
    const std::vector<double> d = {0.0, 1.0, 0.0};
    const std::vector<double> boot = {0.0, 4.0, 0.0};
    std::vector<double> adv, ret;
    compute_gae(r, v, d, 0.9, 0.8, adv, ret, &boot);
    const double delta2 = 3.0 + 0.9 * 1.25 - 0.75;
    const double delta1 = 2.0 + 0.9 * 4.0 - (-0.25);  // bootstraps via boot
    const double delta0 = 1.0 + 0.9 * (-0.25) - 0.5;
    CHECK(adv[2] == doctest::Approx(delta2).epsilon(1e-15));
    CHECK(adv[1] == doctest::Approx(delta1).epsilon(1e-15));  // cut: no tail
    CHECK(adv[0] ==
          doctest::Approx(delta0 + 0.9 * 0.8 * delta1).epsilon(1e-15));
    for (size_t t = 0; t < r.size(); ++t)
      CHECK(ret[t] == doctest::Approx(adv[t] + v[t]).epsilon(1e-15));
    // Without the boot argument the cut bootstraps to zero (terminal form).
    std::vector<double> adv0, ret0;
    compute_gae(r, v, d, 0.9, 0.8, adv0, ret0);
    CHECK(adv0[1] == doctest::Approx(2.0 + 0.25).epsilon(1e-15));
  }
}

TEST_CASE("advantage normalization: zero mean, unit scale, order preserved") {
  RngStream rng(99);
  std::vector<double> a(257);
  for (double& x : a) x = rng.uniform(-3.0, 7.0);
  const std::vector<double> n = normalize_advantages(a);
  double mean = 0.0, var = 0.0;
  for (double x : n) mean += x;
  mean /= n.size();
  for (double x : n) var += (x - mean) * (x - mean);
  var /= n.size();
  CHECK(std::abs(mean) < 1e-12);
  CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-12));

  // Positive affine map: the argmax (greedy one-step choice) is unchanged.
  const auto am_raw = std::max_element(a.begin(), a.end()) - a.begin();
  const auto am_norm = std::max_element(n.begin(), n.end()) - n.begin();
  CHECK(am_raw == am_norm);

  // Constant advantages hit the 1e-8 std floor instead of dividing by zero:
  // the output stays at rounding-noise scale rather than blowing up.
  const std::vector<double> c(31, 4.2);
  for (double x : normalize_advantages(c)) CHECK(std::abs(x) < 1e-6);
}

TEST_CASE("clipped-surrogate loss: identities, clip branches, scalar oracle") {
  SUBCASE("new policy equal to old gives -mean(advantage)") {
    RngStream rng(3);
    const int n = 41;
    std::vector<double> lp(n), adv(n), ent(n, 0.7);
    for (int i = 0; i < n; ++i) {
      lp[i] = rng.uniform(-2.0, 0.0);
      adv[i] = rng.uniform(-1.0, 2.0);
    }
    double mean_adv = 0.0;
    for (double x : adv) mean_adv += x / n;
    const PpoLoss L = ppo_actor_loss(lp, lp, adv, ent, 0.2, 0.0);
    CHECK(L.total == doctest::Approx(-mean_adv).epsilon(1e-14));
    const PpoLoss Le = ppo_actor_loss(lp, lp, adv, ent, 0.2, 0.01);
    CHECK(Le.total == doctest::Approx(-mean_adv - 0.01 * 0.7).epsilon(1e-12));
  }
  SUBCASE("ratio 2 with positive advantage clips and kills the gradient") {
    const std::vector<double> lp_new = {std::log(2.0)};
    const std::vector<double> lp_old = {0.0};
    const std::vector<double> adv = {1.5};
    const std::vector<double> ent = {0.0};
    std::vector<double> dlogp, dent;
    const PpoLoss L =
        ppo_actor_loss(lp_new, lp_old, adv, ent, 0.2, 0.0, &dlogp, &dent);
    CHECK(L.total == doctest::Approx(-1.2 * 1.5).epsilon(1e-15));
    CHECK(dlogp[0] == 0.0);
  }
  SUBCASE("ratio 0.5 with negative advantage clips (pessimistic bound)") {
    const std::vector<double> lp_new = {std::log(0.5)};
    const std::vector<double> lp_old = {0.0};
    const std::vector<double> adv = {-2.0};
    const std::vector<double> ent = {0.0};
    std::vector<double> dlogp, dent;
    const PpoLoss L =
        ppo_actor_loss(lp_new, lp_old, adv, ent, 0.2, 0.0, &dlogp, &dent);
    CHECK(L.total == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(dlogp[0] == 0.0);
  }
  SUBCASE("ratio 0.5 with positive advantage stays unclipped, live gradient") {
    const std::vector<double> lp_new = {std::log(0.5)};
    const std::vector<double> lp_old = {0.0};
    const std::vector<double> adv = {2.0};
    const std::vector<double> ent = {0.0};
    std::vector<double> dlogp, dent;
    const PpoLoss L =
        ppo_actor_loss(lp_new, lp_old, adv, ent, 0.2, 0.0, &dlogp, &dent);
    CHECK(L.total == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(dlogp[0] == doctest::Approx(-1.0).epsilon(1e-15));
  }
  SUBCASE("random batch equals an unvectorized per-element oracle") {
    RngStream rng(17);
    const int n = 64;
    std::vector<double> lp_new(n), lp_old(n), adv(n), ent(n);
    for (int i = 0; i < n; ++i) {
      lp_new[i] = rng.uniform(-3.0, 0.5);
      lp_old[i] = rng.uniform(-3.0, 0.5);
      adv[i] = rng.uniform(-2.0, 2.0);
      ent[i] = rng.uniform(0.0, 1.0);
    }
    const double eps = 0.2, coef = 0.013;
    const PpoLoss L = ppo_actor_loss(lp_new, lp_old, adv, ent, eps, coef);
    double surr = 0.0, entm = 0.0;
    for (int i = 0; i < n; ++i) {
      const double rho = std::exp(lp_new[i] - lp_old[i]);
      double rho_c = rho;
      if (rho_c < 1.0 - eps) rho_c = 1.0 - eps;
      if (rho_c > 1.0 + eps) rho_c = 1.0 + eps;
      const double a = rho * adv[i];
      const double b = rho_c * adv[i];
      surr -= (a < b ? a : b) / n;
      entm += ent[i] / n;
    }
    CHECK(L.total == doctest::Approx(surr - coef * entm).epsilon(1e-12));
    CHECK(L.surrogate == doctest::Approx(surr).epsilon(1e-12));
    CHECK(L.entropy == doctest::Approx(entm).epsilon(1e-12));
  }
}

TEST_CASE("actor training with zero learning rate changes nothing") {
  const ScenarioConfig cfg = tiny_scenario(1, 2);
  PgOptions opt;
  opt.hyper.actor_lr = 0.0;
  opt.hyper.critic_lr = 0.0;
  opt.hyper.epochs = 2;
  opt.hyper.minibatch = 8;
  opt.hidden = {16, 16};
  PgTrainer trainer(cfg, PgTrainer::Mode::Sequential, HeadKind::Beta, opt, 5);
  RolloutBuffer buf = synthetic_buffer(trainer, 16, 11);
  for (double& r : buf.reward) r = 0.3;

  const BlobList before = trainer.to_blobs();
  RngStream rng(21);
  SeqUpdateTrace trace;
  const PgUpdateStats st = trainer.update(buf, rng, &trace);
  CHECK(std::isfinite(st.actor_loss));
  CHECK(std::isfinite(st.critic_loss));
  CHECK(blobs_equal(before, trainer.to_blobs()));
  // Unmoved parameters leave every ratio at 1, so M stays exactly 1.
  for (const std::vector<double>& m : trace.m_after)
    for (double x : m) CHECK(x == 1.0);
}

TEST_CASE("sequential correction factor follows the re-derived ratio chain") {
  const ScenarioConfig cfg = tiny_scenario(1, 2);  // MU, BS0, BS1, controller
  PgOptions opt;
  opt.hyper.epochs = 2;
  opt.hyper.minibatch = 4;
  opt.hyper.actor_lr = 3e-3;
  opt.hidden = {16, 16};
  opt.fixed_order = true;
  const int rows = 4;

  PgTrainer trainer(cfg, PgTrainer::Mode::Sequential, HeadKind::Beta, opt, 42);
  const int A = static_cast<int>(trainer.specs().size());
  RolloutBuffer buf = synthetic_buffer(trainer, rows, 77);
  // Hand-picked per-agent advantages (what the critics would have produced).
  std::vector<std::vector<double>> adv(A, std::vector<double>(rows));
  RngStream arng(5);
  for (int a = 0; a < A; ++a)
    for (int r = 0; r < rows; ++r) adv[a][r] = arng.uniform(-1.0, 1.5);

  // Keep pristine copies to evaluate old log-probs after updates.
  const std::vector<std::vector<double>> logp_old = buf.logp;

  RngStream urng(9);
  SeqUpdateTrace trace;
  trainer.sequential_actor_pass(buf, adv, urng, &trace);

  REQUIRE(static_cast<int>(trace.order.size()) == A);
  for (int a = 0; a < A; ++a) CHECK(trace.order[a] == a);  // fixed order
  REQUIRE(static_cast<int>(trace.m_after.size()) == A);

  // Oracle: after agent k, M must equal the running product of
  // exp(logp_new - logp_old) over agents 0..k, evaluated with the final
  // parameters (later agents never touch earlier agents' nets).
  std::vector<double> m_want(rows, 1.0);
  for (int k = 0; k < A; ++k) {
    const ActorEval ev = actor_eval(trainer.actors()[trainer.agent_actor()[k]],
                                    buf.obs[k], buf.raw[k]);
    for (int r = 0; r < rows; ++r)
      m_want[r] *= std::exp(ev.logp[r] - logp_old[k][r]);
    for (int r = 0; r < rows; ++r)
      CHECK(trace.m_after[k][r] ==
            doctest::Approx(m_want[r]).epsilon(1e-12));
  }
  // The updates actually moved the first agent (ratios not stuck at 1).
  double dev = 0.0;
  for (int r = 0; r < rows; ++r)
    dev = std::max(dev, std::abs(trace.m_after[0][r] - 1.0));
  CHECK(dev > 1e-8);
}

TEST_CASE("the correction factor is exactly a per-sample advantage weight") {
  // Trainer B gets agent 1's advantages pre-multiplied by the M that trainer A
  // derived internally; with the factor forced to one, B must reproduce A's
  // parameters bit for bit.
  const ScenarioConfig cfg = tiny_scenario(1, 2);
  PgOptions base;
  base.hyper.epochs = 2;
  base.hyper.minibatch = 4;
  base.hyper.actor_lr = 3e-3;
  base.hidden = {16, 16};
  base.fixed_order = true;

  PgTrainer ta(cfg, PgTrainer::Mode::Sequential, HeadKind::Beta, base, 42);
  PgOptions forced = base;
  forced.force_m_one = true;
  PgTrainer tb(cfg, PgTrainer::Mode::Sequential, HeadKind::Beta, forced, 42);
  REQUIRE(blobs_equal(ta.to_blobs(), tb.to_blobs()));

  const int A = static_cast<int>(ta.specs().size());
  const int rows = 8;
  RolloutBuffer buf = synthetic_buffer(ta, rows, 123);
  std::vector<std::vector<double>> adv(A, std::vector<double>(rows));
  RngStream arng(31);
  for (int a = 0; a < A; ++a)
    for (int r = 0; r < rows; ++r) adv[a][r] = arng.uniform(-1.0, 1.5);

  RngStream rng_a(55), rng_b(55);
  SeqUpdateTrace trace;
  ta.sequential_actor_pass(buf, adv, rng_a, &trace);

  std::vector<std::vector<double>> adv_b = adv;
  for (int a = 1; a < A; ++a)
    for (int r = 0; r < rows; ++r)
      adv_b[a][r] = trace.m_after[a - 1][r] * adv[a][r];
  tb.sequential_actor_pass(buf, adv_b, rng_b, nullptr);

  CHECK(blobs_equal(ta.to_blobs(), tb.to_blobs()));
}

TEST_CASE("with singleton kinds and no correction, sequential == shared") {
  // One agent per kind, correction forced to 1, fixed order, single epoch:
  // the sequential and parameter-shared updates must produce identical losses.
  const ScenarioConfig cfg = tiny_scenario(1, 1);
  PgOptions opt;
  opt.hyper.epochs = 1;
  opt.hyper.minibatch = 16;
  opt.hidden = {16, 16};
  opt.fixed_order = true;
  opt.force_m_one = true;

  PgTrainer happo(cfg, PgTrainer::Mode::Sequential, HeadKind::Beta, opt, 71);
  PgTrainer mappo(cfg, PgTrainer::Mode::Shared, HeadKind::Beta, opt, 71);
  REQUIRE(blobs_equal(happo.to_blobs(), mappo.to_blobs()));

  std::vector<Environment> envs;
  envs.emplace_back(cfg, 901);
  std::vector<Observations> cur_obs = {envs[0].observe()};
  std::vector<RngStream> act_rng;
  act_rng.push_back(split_stream(33, "acts"));
  CollectStats cs;
  RolloutBuffer buf = collect_rollout(envs, cur_obs, happo.actors(),
                                      happo.agent_actor(), 48, act_rng, cs);
  RolloutBuffer buf2 = buf;

  RngStream rng_h(13), rng_m(13);
  const PgUpdateStats sh = happo.update(buf, rng_h);
  const PgUpdateStats sm = mappo.update(buf2, rng_m);
  CHECK(sh.actor_loss == doctest::Approx(sm.actor_loss).epsilon(1e-10));
  CHECK(sh.critic_loss == doctest::Approx(sm.critic_loss).epsilon(1e-10));
  CHECK(sh.entropy == doctest::Approx(sm.entropy).epsilon(1e-10));
  CHECK(blobs_equal(happo.to_blobs(), mappo.to_blobs()));
  // Both filled identical per-agent value estimates.
  for (size_t a = 0; a < buf.value.size(); ++a)
    CHECK(buf.value[a] == buf2.value[a]);
}

TEST_CASE("sequential pass with factor one equals independent updates") {
  const ScenarioConfig cfg = tiny_scenario(1, 2);
  PgOptions opt;
  opt.hyper.epochs = 2;
  opt.hyper.minibatch = 8;
  opt.hidden = {16, 16};
  opt.fixed_order = true;
  opt.force_m_one = true;
  PgTrainer trainer(cfg, PgTrainer::Mode::Sequential, HeadKind::Beta, opt, 19);

  const int A = static_cast<int>(trainer.specs().size());
  const int rows = 16;
  RolloutBuffer buf = synthetic_buffer(trainer, rows, 7);
  std::vector<std::vector<double>> adv(A, std::vector<double>(rows));
  RngStream arng(3);
  for (int a = 0; a < A; ++a)
    for (int r = 0; r < rows; ++r) adv[a][r] = arng.uniform(-1.0, 1.0);

  // Independent PPO: clone each actor and update it on its own rows with the
  // same shared random stream.
  std::vector<ActorPolicy> clones = trainer.actors();
  RngStream rng_seq(101), rng_ind(101);
  trainer.sequential_actor_pass(buf, adv, rng_seq, nullptr);
  for (int a = 0; a < A; ++a)
    ppo_train_actor(clones[a], buf.obs[a], buf.raw[a], buf.logp[a], adv[a],
                    opt.hyper, rng_ind);

  for (int a = 0; a < A; ++a) {
    const ActorPolicy& got = trainer.actors()[a];
    const ActorPolicy& want = clones[a];
    for (size_t l = 0; l < want.net.layers.size(); ++l) {
      CHECK(got.net.layers[l].W.a == want.net.layers[l].W.a);
      CHECK(got.net.layers[l].b == want.net.layers[l].b);
    }
  }
}

TEST_CASE("shared mode: every member runs the same network") {
  const ScenarioConfig cfg = tiny_scenario(3, 2);
  PgOptions opt;
  opt.hyper.epochs = 1;
  opt.hyper.minibatch = 32;
  opt.hidden = {16, 16};
  PgTrainer trainer(cfg, PgTrainer::Mode::Shared, HeadKind::Beta, opt, 2);

  const std::vector<AgentSpec>& specs = trainer.specs();
  const std::vector<int>& map = trainer.agent_actor();
  // MU agents share slot 0, BS agents a second slot, controller a third.
  for (size_t a = 0; a < specs.size(); ++a)
    for (size_t b = 0; b < specs.size(); ++b)
      if (specs[a].kind == specs[b].kind) CHECK(map[a] == map[b]);
  CHECK(trainer.actors().size() == 3);

  std::vector<Environment> envs;
  envs.emplace_back(cfg, 55);
  std::vector<Observations> cur_obs = {envs[0].observe()};
  std::vector<RngStream> act_rng;
  act_rng.push_back(split_stream(4, "acts"));
  CollectStats cs;
  RolloutBuffer buf = collect_rollout(envs, cur_obs, trainer.actors(),
                                      trainer.agent_actor(), 40, act_rng, cs);
  RngStream rng(8);
  trainer.update(buf, rng);

  // Identical observations produce bit-identical actions for every MU agent.
  std::vector<double> probe(specs[0].obs_dim);
  RngStream prng(6);
  for (double& x : probe) x = prng.uniform();
  const std::vector<double> a0 =
      actor_act_mean(trainer.actors()[map[0]], probe);
  const std::vector<double> a1 =
      actor_act_mean(trainer.actors()[map[1]], probe);
  const std::vector<double> a2 =
      actor_act_mean(trainer.actors()[map[2]], probe);
  CHECK(a0 == a1);
  CHECK(a0 == a2);
}

TEST_CASE("rollout collection is deterministic and well-formed") {
  const ScenarioConfig cfg = tiny_scenario(2, 2);
  PgOptions opt;
  opt.hidden = {16, 16};
  PgTrainer trainer(cfg, PgTrainer::Mode::Sequential, HeadKind::Beta, opt, 3);

  auto collect = [&](){
    std::vector<Environment> envs;
    envs.emplace_back(cfg, 100);
    envs.emplace_back(cfg, 101);
    std::vector<Observations> cur_obs = {envs[0].observe(), envs[1].observe()};
    std::vector<RngStream> act_rng;
    act_rng.push_back(split_stream(9, "a0"));
    act_rng.push_back(split_stream(9, "a1"));
    CollectStats cs;
    return collect_rollout(envs, cur_obs, trainer.actors(),
                           trainer.agent_actor(), 30, act_rng, cs);
  };
  const RolloutBuffer b1 = collect();
  const RolloutBuffer b2 = collect();
  CHECK(b1.state.a == b2.state.a);
  CHECK(b1.reward == b2.reward);
  CHECK(b1.done == b2.done);
  CHECK(b1.boundary_state.a == b2.boundary_state.a);
  for (size_t a = 0; a < b1.obs.size(); ++a) {
    CHECK(b1.obs[a].a == b2.obs[a].a);
    CHECK(b1.raw[a].a == b2.raw[a].a);
    CHECK(b1.logp[a] == b2.logp[a]);
  }

  CHECK(b1.rows() == 60);
  CHECK(b1.n_envs == 2);
  // Episodes are 20 slots long: dones at slot boundaries for both lanes.
  for (int t = 0; t < 30; ++t)
    for (int e = 0; e < 2; ++e)
      CHECK(b1.done[t * 2 + e] == ((t + 1) % 20 == 0 ? 1.0 : 0.0));
  for (double lp : b1.logp[0]) CHECK(std::isfinite(lp));
  for (double x : b1.state.a) CHECK(std::isfinite(x));
  // Time-limit cuts carry the pre-reset state for value bootstrapping; all
  // other rows stay zero. A live state always has some nonzero channel
  // (positions, rates), and it must differ from the post-reset successor.
  CHECK(b1.boundary_state.rows == b1.rows());
  CHECK(b1.boundary_state.cols == b1.state.cols);
  for (int r = 0; r < b1.rows(); ++r) {
    double mag = 0.0;
    for (int j = 0; j < b1.boundary_state.cols; ++j)
      mag += std::abs(b1.boundary_state.at(r, j));
    if (b1.done[r] != 0.0)
      CHECK(mag > 0.0);
    else
      CHECK(mag == 0.0);
  }
}

TEST_CASE("replay: ring wraparound, distinct batches, uniform frequencies") {
  SUBCASE("wraparound overwrites the oldest rows") {
    ReplayBuffer rb(1, 8);
    for (int p = 0; p < 11; ++p) {
      const double v = static_cast<double>(p);
      rb.push(&v);
    }
    CHECK(rb.size() == 8);
    CHECK(rb.pushes() == 11);
    // Slot p % 8 holds push p: slots 0..2 were overwritten by pushes 8..10.
    CHECK(rb.row(0)[0] == 8.0);
    CHECK(rb.row(1)[0] == 9.0);
    CHECK(rb.row(2)[0] == 10.0);
    for (int s = 3; s < 8; ++s) CHECK(rb.row(s)[0] == static_cast<double>(s));
  }
  SUBCASE("batches are distinct within themselves and cover [0, n)") {
    RngStream rng(12);
    const std::vector<long> all = sample_distinct(10, 10, rng);
    std::vector<long> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    for (long i = 0; i < 10; ++i) CHECK(sorted[i] == i);
  }
  SUBCASE("index frequencies are uniform within 3 standard errors") {
    RngStream rng(7777);
    const long n = 50;
    const int k = 10;
    const int batches = 10000;
    std::vector<long> count(n, 0);
    for (int b = 0; b < batches; ++b) {
      const std::vector<long> idx = sample_distinct(n, k, rng);
      std::vector<long> seen = idx;
      std::sort(seen.begin(), seen.end());
      CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
      for (long i : idx) ++count[i];
    }
    // Per index: Binomial(batches, k/n) inclusion counts.
    const double p = static_cast<double>(k) / n;
    const double mean = batches * p;
    const double sd = std::sqrt(batches * p * (1.0 - p));
    for (long i = 0; i < n; ++i)
      CHECK(std::abs(count[i] - mean) <= 3.0 * sd);
  }
}

TEST_CASE("off-policy baseline: target copies, targets, and update gating") {
  std::vector<AgentSpec> specs(1);
  specs[0].kind = AgentKind::Mu;
  specs[0].obs_dim = 1;
  specs[0].act_dim = 1;
  specs[0].n_cats = 0;
  MaddpgOptions opt;
  opt.hidden = {16, 16};
  opt.batch = 8;
  opt.warmup = 8;
  opt.replay_capacity = 64;

  SUBCASE("tau = 1 copies the main nets into the targets") {
    MaddpgTrainer t(specs, 1, opt, 7);
    Observations o;
    o.per_agent = {{0.0}};
    o.global_state = {0.0};
    RngStream rng(5);
    // A few updates desynchronize mains from targets.
    for (int i = 0; i < 12; ++i) {
      ActionSet act;
      std::vector<double> joint;
      t.act_explore(o, 0.3, 1.0, rng, act, joint);
      t.push(o, joint, act[0][0], o, true);
    }
    MaddpgStats st;
    CHECK(t.update(rng, 1.0, &st));
    bool differ = false;
    for (size_t l = 0; l < t.critic().layers.size(); ++l)
      if (t.critic().layers[l].W.a != t.target_critic().layers[l].W.a)
        differ = true;
    CHECK(differ);
    t.soft_update(1.0);
    for (size_t l = 0; l < t.critic().layers.size(); ++l) {
      CHECK(t.critic().layers[l].W.a == t.target_critic().layers[l].W.a);
      CHECK(t.critic().layers[l].b == t.target_critic().layers[l].b);
    }
    for (size_t l = 0; l < t.actor_net(0).layers.size(); ++l)
      CHECK(t.actor_net(0).layers[l].W.a ==
            t.target_actor_net(0).layers[l].W.a);
  }

  SUBCASE("discount zero makes the critic targets equal the rewards") {
    MaddpgOptions o0 = opt;
    o0.gamma = 0.0;
    MaddpgTrainer t(specs, 1, o0, 7);
    Observations o;
    o.per_agent = {{0.4}};
    o.global_state = {0.4};
    RngStream rng(6);
    std::vector<double> rewards;
    for (int i = 0; i < 10; ++i) {
      ActionSet act;
      std::vector<double> joint;
      t.act_explore(o, 0.3, 1.0, rng, act, joint);
      const double r = 2.0 * act[0][0] - 1.0;
      rewards.push_back(r);
      t.push(o, joint, r, o, false);  // non-terminal, so gamma must do the job
    }
    std::vector<long> idx = {0, 3, 7, 9};
    const std::vector<double> y = t.debug_targets(idx);
    for (size_t i = 0; i < idx.size(); ++i)
      CHECK(y[i] == doctest::Approx(rewards[idx[i]]).epsilon(1e-15));
  }

  SUBCASE("updates are skipped until warmup and batch are satisfied") {
    MaddpgTrainer t(specs, 1, opt, 7);
    RngStream rng(4);
    CHECK_FALSE(t.update(rng, 1.0));
    Observations o;
    o.per_agent = {{0.0}};
    o.global_state = {0.0};
    for (int i = 0; i < 7; ++i) {
      ActionSet act;
      std::vector<double> joint;
      t.act_explore(o, 0.3, 1.0, rng, act, joint);
      t.push(o, joint, 0.0, o, true);
    }
    CHECK_FALSE(t.update(rng, 1.0));  // 7 < max(batch, warmup)
    ActionSet act;
    std::vector<double> joint;
    t.act_explore(o, 0.3, 1.0, rng, act, joint);
    t.push(o, joint, 0.0, o, true);
    CHECK(t.update(rng, 1.0));
  }
}

TEST_CASE("off-policy baseline solves a one-step bandit within 0.05") {
  // Constant state, reward 1 - (a - 0.7)^2, every transition terminal: the
  // critic learns the reward surface and the actor must climb to a = 0.7.
  std::vector<AgentSpec> specs(1);
  specs[0].kind = AgentKind::Mu;
  specs[0].obs_dim = 1;
  specs[0].act_dim = 1;
  specs[0].n_cats = 0;
  MaddpgOptions opt;
  opt.hidden = {24, 24};
  opt.batch = 64;
  opt.warmup = 256;
  opt.replay_capacity = 4096;
  opt.actor_lr = 2e-3;
  opt.critic_lr = 5e-3;
  opt.tau = 0.01;
  MaddpgTrainer t(specs, 1, opt, 99);

  Observations o;
  o.per_agent = {{0.0}};
  o.global_state = {0.0};
  RngStream rng(314);
  for (int step = 0; step < 3000; ++step) {
    ActionSet act;
    std::vector<double> joint;
    t.act_explore(o, 0.25, 1.0, rng, act, joint);
    const double a = act[0][0];
    t.push(o, joint, 1.0 - (a - 0.7) * (a - 0.7), o, true);
    t.update(rng, 1.0);
  }
  const ActionSet greedy = t.act_eval(o);
  CHECK(std::abs(greedy[0][0] - 0.7) <= 0.05);
}

TEST_CASE("off-policy baseline drives the discrete head end to end") {
  const ScenarioConfig cfg = tiny_scenario(1, 2);
  MaddpgOptions opt;
  opt.hidden = {16, 16};
  opt.batch = 16;
  opt.warmup = 16;
  opt.replay_capacity = 256;
  MaddpgTrainer t(agent_specs(cfg), global_state_dim(cfg), opt, 11);

  Environment env(cfg, 500);
  RngStream rng(88);
  Observations cur = env.observe();
  const int ctrl = static_cast<int>(t.specs().size()) - 1;
  const BlobList before = t.to_blobs();
  for (int step = 0; step < 40; ++step) {
    ActionSet act;
    std::vector<double> joint;
    t.act_explore(cur, 0.3, 1.0, rng, act, joint);
    // Controller entries are valid category indices; its one-hot block sums
    // to exactly 1 per group.
    for (double v : act[ctrl]) {
      CHECK(v >= 0.0);
      CHECK(v < cfg.n_bss);
      CHECK(v == std::floor(v));
    }
    const StepRecord rec = env.step(act);
    Observations post = env.observe();
    t.push(cur, joint, rec.reward, post, rec.done);
    if (rec.done) {
      env.reset();
      post = env.observe();
    }
    cur = post;
    t.update(rng, 1.0);
  }
  // Gradients flowed through the straight-through head: the controller's
  // actor parameters moved.
  const BlobList after = t.to_blobs();
  CHECK_FALSE(blobs_equal(before, after));
}

TEST_CASE("checkpoints round-trip bit for bit and reject corruption") {
  const ScenarioConfig cfg = tiny_scenario(2, 2);
  PgOptions opt;
  opt.hidden = {16, 16};
  PgTrainer trainer(cfg, PgTrainer::Mode::Sequential, HeadKind::Gauss, opt, 1);
  const std::string path = "ckpt_roundtrip.bin";

  SUBCASE("round trip restores identical parameters and behavior") {
    save_checkpoint(path, trainer.to_blobs());
    PgTrainer other(cfg, PgTrainer::Mode::Sequential, HeadKind::Gauss, opt, 2);
    CHECK_FALSE(blobs_equal(trainer.to_blobs(), other.to_blobs()));
    load_into(other, path);
    CHECK(blobs_equal(trainer.to_blobs(), other.to_blobs()));
    const EvalMetrics a = evaluate_policy(trainer, cfg, 777, 2);
    const EvalMetrics b = evaluate_policy(other, cfg, 777, 2);
    CHECK(a.avg_energy == b.avg_energy);
    CHECK(a.fail_ratio == b.fail_ratio);
    CHECK(a.reward == b.reward);
  }
  SUBCASE("flipped byte surfaces as a checksum error") {
    save_checkpoint(path, trainer.to_blobs());
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string bytes = ss.str();
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
  }
  SUBCASE("truncation surfaces as an error") {
    save_checkpoint(path, trainer.to_blobs());
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str().substr(0, 40);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
  }
  SUBCASE("wrong magic surfaces as an error") {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "definitely not a parameter dump, padded to a plausible size";
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
  }
  SUBCASE("shape mismatch on load surfaces as an error") {
    save_checkpoint(path, trainer.to_blobs());
    PgOptions narrow = opt;
    narrow.hidden = {8, 8};
    PgTrainer other(cfg, PgTrainer::Mode::Sequential, HeadKind::Gauss, narrow,
                    2);
    CHECK_THROWS(load_into(other, path));
  }
  std::remove(path.c_str());
}

TEST_CASE("train config: validation names fields, JSON rejects unknown keys") {
  TrainConfig tc;
  CHECK_NOTHROW(validate(tc));
  tc.gamma = 1.0;
  CHECK_THROWS_AS(validate(tc), ConfigError);
  tc = TrainConfig{};
  tc.lam = 1.5;
  CHECK_THROWS_AS(validate(tc), ConfigError);
  tc = TrainConfig{};
  tc.clip_eps = 0.0;
  CHECK_THROWS_AS(validate(tc), ConfigError);
  tc = TrainConfig{};
  tc.tau = 0.0;
  CHECK_THROWS_AS(validate(tc), ConfigError);
  tc = TrainConfig{};
  tc.tau = 1.0;
  CHECK_NOTHROW(validate(tc));
  tc = TrainConfig{};
  tc.algo = "dqn";
  CHECK_THROWS_AS(validate(tc), ConfigError);

  const TrainConfig parsed = parse_train_json(
      R"({"algo":"beta-mappo","gamma":0.97,"hidden":[32,16],
          "rollout_length":192,"happo_fixed_order":true})");
  CHECK(parsed.algo == "beta-mappo");
  CHECK(parsed.gamma == doctest::Approx(0.97));
  CHECK(parsed.hidden == std::vector<int>{32, 16});
  CHECK(parsed.rollout_length == 192);
  CHECK(parsed.happo_fixed_order);
  CHECK(parsed.lam == doctest::Approx(0.95));  // untouched default

  CHECK_THROWS_AS(parse_train_json(R"({"gama":0.9})"), ConfigError);
  CHECK_THROWS_AS(parse_train_json(R"({"gamma":"high"})"), ConfigError);
  CHECK_THROWS_AS(parse_train_json("not json"), ConfigError);
}

namespace {

TrainConfig smoke_train_config(const char* algo) {
  TrainConfig tc;
  tc.algo = algo;
  tc.total_env_steps = 512;
  tc.eval_interval = 256;
  tc.eval_episodes = 1;
  tc.rollout_length = 64;
  tc.n_envs = 2;
  tc.epochs = 2;
  tc.minibatch = 64;
  tc.hidden = {16, 16};
  tc.batch_size = 32;
  tc.warmup = 64;
  tc.replay_capacity = 2048;
  return tc;
}

}  // namespace

TEST_CASE("training driver: schema, determinism, step-zero, abort") {
  const ScenarioConfig cfg = tiny_scenario(2, 1);

  SUBCASE("zero total steps emits exactly the initial evaluation") {
    TrainConfig tc = smoke_train_config("beta-happo");
    tc.total_env_steps = 0;
    std::ostringstream csv;
    const TrainRunResult res = train_run(cfg, tc, 5, &csv);
    REQUIRE(res.points.size() == 1);
    CHECK(res.points[0].step == 0);
    const std::string text = csv.str();
    CHECK(text.rfind("step,algorithm,seed,avg_energy_J,failure_ratio,reward,"
                      "actor_loss,critic_loss,entropy\n",
                      0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  }

  SUBCASE("identical seeds give byte-identical metrics") {
    for (const char* algo : {"beta-happo", "beta-mappo", "maddpg"}) {
      CAPTURE(algo);
      const TrainConfig tc = smoke_train_config(algo);
      std::ostringstream c1, c2;
      train_run(cfg, tc, 17, &c1);
      train_run(cfg, tc, 17, &c2);
      CHECK(c1.str() == c2.str());
      CHECK(c1.str().size() > 100);
      std::ostringstream c3;
      train_run(cfg, tc, 18, &c3);
      CHECK(c1.str() != c3.str());
    }
  }

  SUBCASE("gaussian policies clip, interior-supported policies never do") {
    TrainConfig tg = smoke_train_config("gaussian-happo");
    const TrainRunResult rg = train_run(cfg, tg, 3, nullptr);
    CHECK(rg.cont_samples > 0);
    CHECK(rg.head_clips > 0);

    TrainConfig tb = smoke_train_config("beta-happo");
    const TrainRunResult rb = train_run(cfg, tb, 3, nullptr);
    CHECK(rb.cont_samples > 0);
    CHECK(rb.head_clips == 0);
  }

  SUBCASE("a non-finite loss aborts with a diagnostic") {
    TrainConfig tc = smoke_train_config("beta-happo");
    // One optimizer step at this rate detonates the critic parameters; the
    // squared-error loss then overflows to inf and the driver must abort.
    tc.critic_lr = 1e200;
    CHECK_THROWS_AS(train_run(cfg, tc, 5, nullptr), TrainAbort);
  }

  SUBCASE("final checkpoint restores the deterministic policy exactly") {
    TrainConfig tc = smoke_train_config("beta-happo");
    const std::string path = "train_final.ckpt";
    std::ostringstream csv;
    const TrainRunResult res = train_run(cfg, tc, 29, &csv, path);

    PgOptions opt;
    opt.hidden = tc.hidden;
    PgTrainer restored(cfg, PgTrainer::Mode::Sequential, HeadKind::Beta, opt,
                       999);
    load_into(restored, path);
    const EvalMetrics m = evaluate_policy(restored, cfg,
                                          child_seed(29, "eval-env"),
                                          tc.eval_episodes);
    CHECK(m.avg_energy == res.points.back().avg_energy);
    CHECK(m.fail_ratio == res.points.back().fail_ratio);
    CHECK(m.reward == res.points.back().reward);
    std::remove(path.c_str());
  }
}

TEST_CASE("learning smoke: energy does not rise over a short run"
          * doctest::timeout(600)) {
  // Small scenario, three seeds; the final evaluated energy must not exceed
  // the initial one in at least two of them.
  ScenarioConfig cfg = tiny_scenario(2, 1);
  cfg.horizon_slots = 50;
  TrainConfig tc;
  tc.algo = "beta-happo";
  tc.total_env_steps = 10000;
  tc.eval_interval = 5000;
  tc.eval_episodes = 2;
  tc.rollout_length = 250;
  tc.n_envs = 2;
  tc.epochs = 5;
  tc.minibatch = 128;
  tc.actor_lr = 1e-3;
  tc.hidden = {32, 32};

  int improved = 0;
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    const TrainRunResult res = train_run(cfg, tc, seed, nullptr);
    REQUIRE(res.points.size() >= 2);
    const double first = res.points.front().avg_energy;
    const double last = res.points.back().avg_energy;
    CAPTURE(seed);
    CAPTURE(first);
    CAPTURE(last);
    if (last <= first) ++improved;
  }
  CHECK(improved >= 2);
}
