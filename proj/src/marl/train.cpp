#include "wdtn/marl/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "wdtn/marl/checkpoint.hpp"
#include "wdtn/marl/rollout.hpp"

namespace wdtn {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

bool known_algo(const std::string& s) {
  for (const char* a : kAlgoNames)
    if (s == a) return true;
  return false;
}

std::string csv_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

}  // namespace

std::uint64_t child_seed(std::uint64_t seed, std::string_view label) {
  return splitmix64(seed ^ fnv1a64(label));
}

void validate(const TrainConfig& tc) {
  if (!known_algo(tc.algo)) fail("unknown algorithm '" + tc.algo + "'");
  if (!(tc.gamma > 0.0 && tc.gamma < 1.0))
    fail("train field 'gamma' must be in (0,1)");
  if (!(tc.lam >= 0.0 && tc.lam <= 1.0))
    fail("train field 'lam' must be in [0,1]");
  if (!(tc.clip_eps > 0.0)) fail("train field 'clip_eps' must be > 0");
  if (tc.actor_lr < 0.0) fail("train field 'actor_lr' must be >= 0");
  if (tc.critic_lr < 0.0) fail("train field 'critic_lr' must be >= 0");
  if (tc.epochs < 1) fail("train field 'epochs' must be >= 1");
  if (tc.minibatch < 1) fail("train field 'minibatch' must be >= 1");
  if (tc.rollout_length < 1) fail("train field 'rollout_length' must be >= 1");
  if (tc.n_envs < 1) fail("train field 'n_envs' must be >= 1");
  if (tc.entropy_coef < 0.0) fail("train field 'entropy_coef' must be >= 0");
  if (tc.total_env_steps < 0)
    fail("train field 'total_env_steps' must be >= 0");
  if (tc.eval_interval < 1) fail("train field 'eval_interval' must be >= 1");
  if (tc.eval_episodes < 1) fail("train field 'eval_episodes' must be >= 1");
  if (tc.hidden.empty()) fail("train field 'hidden' must be non-empty");
  for (int h : tc.hidden)
    if (h < 1) fail("train field 'hidden' entries must be >= 1");
  if (!(tc.tau > 0.0 && tc.tau <= 1.0))
    fail("train field 'tau' must be in (0,1]");
  if (tc.replay_capacity < 1)
    fail("train field 'replay_capacity' must be >= 1");
  if (tc.batch_size < 1) fail("train field 'batch_size' must be >= 1");
  if (tc.warmup < 0) fail("train field 'warmup' must be >= 0");
  if (tc.update_every < 1) fail("train field 'update_every' must be >= 1");
  if (!(tc.sigma_start >= 0.0 && tc.sigma_end >= 0.0))
    fail("train fields 'sigma_start'/'sigma_end' must be >= 0");
  if (!(tc.temp_start > 0.0 && tc.temp_end > 0.0))
    fail("train fields 'temp_start'/'temp_end' must be > 0");
}

TrainConfig parse_train_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("train config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("train config root must be a JSON object");

  static const std::set<std::string> known = {
      "algo", "total_env_steps", "eval_interval", "eval_episodes", "gamma",
      "lam", "clip_eps", "actor_lr", "critic_lr", "epochs", "minibatch",
      "rollout_length", "n_envs", "entropy_coef", "hidden", "log_std_init",
      "tau", "replay_capacity", "batch_size", "warmup", "update_every",
      "sigma_start", "sigma_end", "temp_start", "temp_end",
      "happo_force_m_one", "happo_fixed_order"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      fail("unknown train config key '" + it.key() + "'");

  TrainConfig tc;
  auto num = [&](const char* key, double fb) {
    if (!j.contains(key)) return fb;
    if (!j.at(key).is_number())
      fail(std::string("train key '") + key + "' must be a number");
    return j.at(key).get<double>();
  };
  auto integer = [&](const char* key, long fb) {
    if (!j.contains(key)) return fb;
    if (!j.at(key).is_number_integer())
      fail(std::string("train key '") + key + "' must be an integer");
    return j.at(key).get<long>();
  };
  auto boolean = [&](const char* key, bool fb) {
    if (!j.contains(key)) return fb;
    if (!j.at(key).is_boolean())
      fail(std::string("train key '") + key + "' must be a boolean");
    return j.at(key).get<bool>();
  };
  if (j.contains("algo")) {
    if (!j.at("algo").is_string()) fail("train key 'algo' must be a string");
    tc.algo = j.at("algo").get<std::string>();
  }
  tc.total_env_steps = integer("total_env_steps", tc.total_env_steps);
  tc.eval_interval = integer("eval_interval", tc.eval_interval);
  tc.eval_episodes = static_cast<int>(integer("eval_episodes", tc.eval_episodes));
  tc.gamma = num("gamma", tc.gamma);
  tc.lam = num("lam", tc.lam);
  tc.clip_eps = num("clip_eps", tc.clip_eps);
  tc.actor_lr = num("actor_lr", tc.actor_lr);
  tc.critic_lr = num("critic_lr", tc.critic_lr);
  tc.epochs = static_cast<int>(integer("epochs", tc.epochs));
  tc.minibatch = static_cast<int>(integer("minibatch", tc.minibatch));
  tc.rollout_length = static_cast<int>(integer("rollout_length", tc.rollout_length));
  tc.n_envs = static_cast<int>(integer("n_envs", tc.n_envs));
  tc.entropy_coef = num("entropy_coef", tc.entropy_coef);
  if (j.contains("hidden")) {
    if (!j.at("hidden").is_array())
      fail("train key 'hidden' must be an array of integers");
    tc.hidden.clear();
    for (const json& v : j.at("hidden")) {
      if (!v.is_number_integer())
        fail("train key 'hidden' must be an array of integers");
      tc.hidden.push_back(v.get<int>());
    }
  }
  tc.log_std_init = num("log_std_init", tc.log_std_init);
  tc.tau = num("tau", tc.tau);
  tc.replay_capacity = integer("replay_capacity", tc.replay_capacity);
  tc.batch_size = static_cast<int>(integer("batch_size", tc.batch_size));
  tc.warmup = integer("warmup", tc.warmup);
  tc.update_every = static_cast<int>(integer("update_every", tc.update_every));
  tc.sigma_start = num("sigma_start", tc.sigma_start);
  tc.sigma_end = num("sigma_end", tc.sigma_end);
  tc.temp_start = num("temp_start", tc.temp_start);
  tc.temp_end = num("temp_end", tc.temp_end);
  tc.happo_force_m_one = boolean("happo_force_m_one", tc.happo_force_m_one);
  tc.happo_fixed_order = boolean("happo_fixed_order", tc.happo_fixed_order);

  validate(tc);
  return tc;
}

TrainConfig load_train_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open train config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_train_json(ss.str());
}

namespace {

struct EvalTotals {
  double energy = 0.0;
  double reward = 0.0;
  long requests = 0;
  long failures = 0;
  long slots = 0;
};

EvalMetrics finish_eval(const EvalTotals& t, int n_mus) {
  EvalMetrics m;
  const double denom = static_cast<double>(t.slots) * std::max(n_mus, 1);
  m.avg_energy = t.slots > 0 ? t.energy / denom : 0.0;
  m.fail_ratio =
      t.requests > 0 ? static_cast<double>(t.failures) / t.requests : 0.0;
  m.reward = t.slots > 0 ? t.reward / static_cast<double>(t.slots) : 0.0;
  return m;
}

template <class ActFn>
EvalMetrics run_eval_episodes(const ScenarioConfig& scn, std::uint64_t seed,
                              int episodes, ActFn&& act) {
  Environment env(scn, seed);
  EvalTotals t;
  for (int ep = 0; ep < episodes; ++ep) {
    if (ep > 0) env.reset();
    bool done = false;
    while (!done) {
      const Observations obs = env.observe();
      const StepRecord rec = env.step(act(obs));
      t.energy += rec.metrics.total_energy();
      t.reward += rec.reward;
      t.requests += rec.metrics.requests;
      t.failures += rec.metrics.failures;
      ++t.slots;
      done = rec.done;
    }
  }
  return finish_eval(t, scn.n_mus);
}

}  // namespace

EvalMetrics evaluate_policy(const PgTrainer& trainer, const ScenarioConfig& scn,
                            std::uint64_t eval_seed, int episodes) {
  const std::vector<int>& map = trainer.agent_actor();
  const std::vector<ActorPolicy>& actors = trainer.actors();
  return run_eval_episodes(scn, eval_seed, episodes,
                           [&](const Observations& obs) {
                             ActionSet act(map.size());
                             for (size_t a = 0; a < map.size(); ++a)
                               act[a] = actor_act_mean(actors[map[a]],
                                                       obs.per_agent[a]);
                             return act;
                           });
}

EvalMetrics evaluate_policy(const MaddpgTrainer& trainer,
                            const ScenarioConfig& scn, std::uint64_t eval_seed,
                            int episodes) {
  return run_eval_episodes(
      scn, eval_seed, episodes,
      [&](const Observations& obs) { return trainer.act_eval(obs); });
}

void load_into(PgTrainer& trainer, const std::string& path) {
  trainer.from_blobs(load_checkpoint(path));
}

void load_into(MaddpgTrainer& trainer, const std::string& path) {
  trainer.from_blobs(load_checkpoint(path));
}

namespace {

void emit_row(std::ostream* csv, const TrainConfig& tc, std::uint64_t seed,
              const EvalPoint& p) {
  if (!csv) return;
  (*csv) << p.step << ',' << tc.algo << ',' << seed << ','
         << csv_num(p.avg_energy) << ',' << csv_num(p.fail_ratio) << ','
         << csv_num(p.reward) << ',' << csv_num(p.actor_loss) << ','
         << csv_num(p.critic_loss) << ',' << csv_num(p.entropy) << '\n';
}

[[noreturn]] void abort_nan(const char* what, long step, double actor_loss,
                            double critic_loss) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "non-finite %s at env step %ld (actor_loss=%g critic_loss=%g);"
                " aborting run",
                what, step, actor_loss, critic_loss);
  throw TrainAbort(buf);
}

}  // namespace

TrainRunResult train_run(const ScenarioConfig& scn, const TrainConfig& tc,
                         std::uint64_t run_seed, std::ostream* csv,
                         const std::string& checkpoint_path) {
  validate(tc);
  validate(scn);
  TrainRunResult result;
  if (csv)
    (*csv) << "step,algorithm,seed,avg_energy_J,failure_ratio,reward,"
              "actor_loss,critic_loss,entropy\n";

  const std::uint64_t eval_seed = child_seed(run_seed, "eval-env");
  const bool off_policy = tc.algo == "maddpg";

  // Shared across algorithms: parallel environment lanes with their own seeds
  // and action-noise streams.
  std::vector<Environment> envs;
  std::vector<Observations> cur_obs;
  std::vector<RngStream> act_rng;
  char label[32];
  for (int e = 0; e < tc.n_envs; ++e) {
    std::snprintf(label, sizeof(label), "env-lane-%d", e);
    envs.emplace_back(scn, child_seed(run_seed, label));
    cur_obs.push_back(envs.back().observe());
    std::snprintf(label, sizeof(label), "act-lane-%d", e);
    act_rng.push_back(split_stream(run_seed, label));
  }
  RngStream update_rng = split_stream(run_seed, "update");

  EvalPoint last_losses;  // carries the latest update stats into eval rows

  if (!off_policy) {
    const PgTrainer::Mode mode = tc.algo == "beta-mappo"
                                     ? PgTrainer::Mode::Shared
                                     : PgTrainer::Mode::Sequential;
    const HeadKind head =
        tc.algo == "gaussian-happo" ? HeadKind::Gauss : HeadKind::Beta;
    PgOptions opt;
    opt.hyper.clip_eps = tc.clip_eps;
    opt.hyper.entropy_coef = tc.entropy_coef;
    opt.hyper.actor_lr = tc.actor_lr;
    opt.hyper.critic_lr = tc.critic_lr;
    opt.hyper.epochs = tc.epochs;
    opt.hyper.minibatch = tc.minibatch;
    opt.gamma = tc.gamma;
    opt.lam = tc.lam;
    opt.hidden = tc.hidden;
    opt.log_std_init = tc.log_std_init;
    opt.force_m_one = tc.happo_force_m_one;
    opt.fixed_order = tc.happo_fixed_order;
    PgTrainer trainer(scn, mode, head, opt, child_seed(run_seed, "trainer"));

    auto eval_point = [&](long step) {
      const EvalMetrics m =
          evaluate_policy(trainer, scn, eval_seed, tc.eval_episodes);
      EvalPoint p;
      p.step = step;
      p.avg_energy = m.avg_energy;
      p.fail_ratio = m.fail_ratio;
      p.reward = m.reward;
      p.actor_loss = last_losses.actor_loss;
      p.critic_loss = last_losses.critic_loss;
      p.entropy = last_losses.entropy;
      result.points.push_back(p);
      emit_row(csv, tc, run_seed, p);
    };

    eval_point(0);
    long next_eval = tc.eval_interval;
    CollectStats cstats;
    while (cstats.env_steps < tc.total_env_steps) {
      // Truncate the last rollout so the run trains on exactly
      // total_env_steps lane-steps (keeps evaluation steps aligned across
      // algorithms and seeds).
      const long remaining = tc.total_env_steps - cstats.env_steps;
      const int rl = static_cast<int>(std::min<long>(
          tc.rollout_length, (remaining + tc.n_envs - 1) / tc.n_envs));
      PgUpdateStats st;
      try {
        RolloutBuffer buf =
            collect_rollout(envs, cur_obs, trainer.actors(),
                            trainer.agent_actor(), rl, act_rng, cstats);
        st = trainer.update(buf, update_rng);
      } catch (const TrainAbort&) {
        throw;
      } catch (const std::exception& e) {
        throw TrainAbort(std::string("training failed at env step ") +
                         std::to_string(cstats.env_steps) + ": " + e.what());
      }
      if (!std::isfinite(st.actor_loss) || !std::isfinite(st.critic_loss))
        abort_nan("update loss", cstats.env_steps, st.actor_loss,
                  st.critic_loss);
      last_losses.actor_loss = st.actor_loss;
      last_losses.critic_loss = st.critic_loss;
      last_losses.entropy = st.entropy;
      while (cstats.env_steps >= next_eval &&
             next_eval <= tc.total_env_steps) {
        eval_point(next_eval);
        next_eval += tc.eval_interval;
      }
    }
    if (result.points.empty() || result.points.back().step < cstats.env_steps)
      eval_point(cstats.env_steps);
    result.head_clips = cstats.head_clips;
    result.cont_samples = cstats.cont_samples;
    result.env_steps = cstats.env_steps;
    if (!checkpoint_path.empty())
      save_checkpoint(checkpoint_path, trainer.to_blobs());
  } else {
    MaddpgOptions opt;
    opt.hidden = tc.hidden;
    opt.gamma = tc.gamma;
    opt.tau = tc.tau;
    opt.actor_lr = tc.actor_lr;
    opt.critic_lr = tc.critic_lr;
    opt.batch = tc.batch_size;
    opt.replay_capacity = tc.replay_capacity;
    opt.warmup = tc.warmup;
    MaddpgTrainer trainer(agent_specs(scn), global_state_dim(scn), opt,
                          child_seed(run_seed, "trainer"));

    auto eval_point = [&](long step) {
      const EvalMetrics m =
          evaluate_policy(trainer, scn, eval_seed, tc.eval_episodes);
      EvalPoint p;
      p.step = step;
      p.avg_energy = m.avg_energy;
      p.fail_ratio = m.fail_ratio;
      p.reward = m.reward;
      p.actor_loss = last_losses.actor_loss;
      p.critic_loss = last_losses.critic_loss;
      p.entropy = 0.0;
      result.points.push_back(p);
      emit_row(csv, tc, run_seed, p);
    };

    eval_point(0);
    long next_eval = tc.eval_interval;
    long steps = 0;
    long update_debt = 0;
    std::vector<ActionSet> acts(tc.n_envs);
    std::vector<std::vector<double>> joints(tc.n_envs);
    const double horizon =
        std::max<double>(1.0, static_cast<double>(tc.total_env_steps));
    while (steps < tc.total_env_steps) {
      const double frac = std::min(1.0, static_cast<double>(steps) / horizon);
      const double sigma =
          tc.sigma_start + (tc.sigma_end - tc.sigma_start) * frac;
      const double temp = tc.temp_start + (tc.temp_end - tc.temp_start) * frac;
      for (int e = 0; e < tc.n_envs && steps < tc.total_env_steps; ++e) {
        trainer.act_explore(cur_obs[e], sigma, temp, act_rng[e], acts[e],
                            joints[e]);
        const StepRecord rec = envs[e].step(acts[e]);
        Observations post = envs[e].observe();
        // Episodes end only by hitting the fixed horizon — a time limit, not
        // a terminal state — so the replay entry keeps done=0 and the target
        // bootstraps through the pre-reset successor stored in `post`.
        trainer.push(cur_obs[e], joints[e], rec.reward, post, false);
        if (rec.done) {
          envs[e].reset();
          post = envs[e].observe();
        }
        cur_obs[e] = std::move(post);
        ++steps;
        ++update_debt;
        if (update_debt >= tc.update_every) {
          update_debt -= tc.update_every;
          MaddpgStats st;
          if (trainer.update(update_rng, temp, &st)) {
            if (!std::isfinite(st.critic_loss) ||
                !std::isfinite(st.actor_loss))
              abort_nan("update loss", steps, st.actor_loss, st.critic_loss);
            last_losses.actor_loss = st.actor_loss;
            last_losses.critic_loss = st.critic_loss;
          }
        }
        while (steps >= next_eval && next_eval <= tc.total_env_steps) {
          eval_point(next_eval);
          next_eval += tc.eval_interval;
        }
      }
    }
    if (result.points.empty() || result.points.back().step < steps)
      eval_point(steps);
    result.env_steps = steps;
    if (!checkpoint_path.empty())
      save_checkpoint(checkpoint_path, trainer.to_blobs());
  }
  return result;
}

}  // namespace wdtn
