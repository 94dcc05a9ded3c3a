#include "wdtn/marl/trainers.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wdtn {

namespace {

std::string slot_label(const char* what, int slot) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "init-%s-%d", what, slot);
  return std::string(buf);
}

HeadKind head_for(const AgentSpec& s, HeadKind cont_head) {
  return s.kind == AgentKind::Controller ? HeadKind::Cat : cont_head;
}

}  // namespace

PgTrainer::PgTrainer(const ScenarioConfig& cfg, Mode mode, HeadKind cont_head,
                     const PgOptions& opt, std::uint64_t seed)
    : cfg_(cfg), mode_(mode), opt_(opt), specs_(agent_specs(cfg)) {
  assert(cont_head != HeadKind::Cat);
  const int A = static_cast<int>(specs_.size());
  agent_actor_.assign(A, -1);

  // Actor slots: one per agent (sequential) or one per kind present (shared).
  // Slot order follows first appearance in the agent roster, so a roster with
  // one agent per kind yields identical slot numbering in both modes.
  std::vector<int> kind_slot(3, -1);
  for (int a = 0; a < A; ++a) {
    int slot;
    if (mode_ == Mode::Sequential) {
      slot = a;
    } else {
      int& ks = kind_slot[static_cast<int>(specs_[a].kind)];
      if (ks < 0) {
        ks = static_cast<int>(slot_members_.size());
        slot_members_.emplace_back();
      }
      slot = ks;
    }
    if (slot == static_cast<int>(slot_members_.size()))
      slot_members_.emplace_back();
    agent_actor_[a] = slot;
    slot_members_[slot].push_back(a);
  }

  const int S = global_state_dim(cfg_);
  const int n_slots = static_cast<int>(slot_members_.size());
  actors_.reserve(n_slots);
  critics_.reserve(n_slots);
  for (int s = 0; s < n_slots; ++s) {
    const AgentSpec& sp = specs_[slot_members_[s].front()];
    RngStream a_init = split_stream(seed, slot_label("actor", s));
    actors_.push_back(make_actor(head_for(sp, cont_head), sp.obs_dim,
                                 sp.act_dim, sp.n_cats, opt_.hidden,
                                 opt_.log_std_init, a_init));
    RngStream c_init = split_stream(seed, slot_label("critic", s));
    std::vector<int> sizes;
    sizes.push_back(S);
    for (int h : opt_.hidden) sizes.push_back(h);
    sizes.push_back(1);
    critics_.emplace_back(sizes, c_init);
    critic_opt_.push_back(make_adam(critics_.back()));
  }
}

void PgTrainer::gae_all(RolloutBuffer& buf,
                        std::vector<std::vector<double>>& adv,
                        std::vector<std::vector<double>>& ret) const {
  const int n_slots = static_cast<int>(actors_.size());
  const int rows = buf.rows();
  adv.assign(n_slots, std::vector<double>(rows, 0.0));
  ret.assign(n_slots, std::vector<double>(rows, 0.0));

  // Rows where an episode hit its time limit; their pre-reset states feed the
  // bootstrap values.
  std::vector<int> cut_rows;
  for (int r = 0; r < rows; ++r)
    if (buf.done[r] != 0.0) cut_rows.push_back(r);
  Matrix cut_states(static_cast<int>(cut_rows.size()), buf.state.cols);
  for (size_t k = 0; k < cut_rows.size(); ++k) {
    const double* src = buf.boundary_state.row(cut_rows[k]);
    double* dst = cut_states.row(static_cast<int>(k));
    for (int j = 0; j < buf.state.cols; ++j) dst[j] = src[j];
  }

  std::vector<double> r_lane(buf.steps), d_lane(buf.steps),
      v_lane(buf.steps + 1), b_lane(buf.steps), a_lane, g_lane;
  std::vector<double> boot_row(rows, 0.0);
  for (int s = 0; s < n_slots; ++s) {
    Matrix v = critics_[s].forward(buf.state);
    Matrix vf = critics_[s].forward(buf.final_state);
    if (!cut_rows.empty()) {
      Matrix vb = critics_[s].forward(cut_states);
      for (size_t k = 0; k < cut_rows.size(); ++k)
        boot_row[cut_rows[k]] = vb.at(static_cast<int>(k), 0);
    }
    for (int e = 0; e < buf.n_envs; ++e) {
      for (int t = 0; t < buf.steps; ++t) {
        const int r = t * buf.n_envs + e;
        r_lane[t] = buf.reward[r];
        d_lane[t] = buf.done[r];
        v_lane[t] = v.at(r, 0);
        b_lane[t] = boot_row[r];
      }
      v_lane[buf.steps] = vf.at(e, 0);
      compute_gae(r_lane, v_lane, d_lane, opt_.gamma, opt_.lam, a_lane,
                  g_lane, &b_lane);
      for (int t = 0; t < buf.steps; ++t) {
        const int r = t * buf.n_envs + e;
        adv[s][r] = a_lane[t];
        ret[s][r] = g_lane[t];
      }
    }
    for (int a : slot_members_[s]) {
      for (int r = 0; r < rows; ++r) {
        const int t = r / buf.n_envs, e = r % buf.n_envs;
        buf.value[a][r] = v.at(t * buf.n_envs + e, 0);
      }
    }
  }
}

PgUpdateStats PgTrainer::sequential_actor_pass(
    const RolloutBuffer& buf, const std::vector<std::vector<double>>& adv,
    RngStream& rng, SeqUpdateTrace* trace) {
  const int A = static_cast<int>(specs_.size());
  const int rows = buf.rows();

  std::vector<int> order(A);
  for (int a = 0; a < A; ++a) order[a] = a;
  if (!opt_.fixed_order) shuffle_indices(order, rng);
  if (trace) {
    trace->order = order;
    trace->m_after.clear();
  }

  std::vector<double> m(rows, 1.0);
  PpoTrainStats acc;
  for (int k = 0; k < A; ++k) {
    const int a = order[k];
    const int slot = agent_actor_[a];
    std::vector<double> adv_eff(rows);
    for (int r = 0; r < rows; ++r) adv_eff[r] = m[r] * adv[slot][r];
    const PpoTrainStats st =
        ppo_train_actor(actors_[slot], buf.obs[a], buf.raw[a], buf.logp[a],
                        adv_eff, opt_.hyper, rng);
    acc.actor_loss += st.actor_loss;
    acc.entropy += st.entropy;
    if (!opt_.force_m_one) {
      const ActorEval ev = actor_eval(actors_[slot], buf.obs[a], buf.raw[a]);
      for (int r = 0; r < rows; ++r)
        m[r] *= std::exp(ev.logp[r] - buf.logp[a][r]);
    }
    if (trace) trace->m_after.push_back(m);
  }
  PgUpdateStats out;
  out.actor_loss = acc.actor_loss / A;
  out.entropy = acc.entropy / A;
  return out;
}

PgUpdateStats PgTrainer::update(RolloutBuffer& buf, RngStream& rng,
                                SeqUpdateTrace* trace) {
  std::vector<std::vector<double>> adv, ret;
  gae_all(buf, adv, ret);

  PgUpdateStats stats;
  const int n_slots = static_cast<int>(actors_.size());
  if (mode_ == Mode::Sequential) {
    stats = sequential_actor_pass(buf, adv, rng, trace);
  } else {
    const int rows = buf.rows();
    PpoTrainStats acc;
    for (int s = 0; s < n_slots; ++s) {
      const std::vector<int>& members = slot_members_[s];
      const int n_m = static_cast<int>(members.size());
      Matrix obs_pool(rows * n_m, buf.obs[members[0]].cols);
      Matrix raw_pool(rows * n_m, buf.raw[members[0]].cols);
      std::vector<double> logp_pool(rows * n_m), adv_pool(rows * n_m);
      for (int mi = 0; mi < n_m; ++mi) {
        const int a = members[mi];
        for (int r = 0; r < rows; ++r) {
          const int pr = mi * rows + r;
          const double* so = buf.obs[a].row(r);
          double* dof = obs_pool.row(pr);
          for (int j = 0; j < obs_pool.cols; ++j) dof[j] = so[j];
          const double* sr = buf.raw[a].row(r);
          double* dr = raw_pool.row(pr);
          for (int j = 0; j < raw_pool.cols; ++j) dr[j] = sr[j];
          logp_pool[pr] = buf.logp[a][r];
          adv_pool[pr] = adv[s][r];
        }
      }
      const PpoTrainStats st =
          ppo_train_actor(actors_[s], obs_pool, raw_pool, logp_pool, adv_pool,
                          opt_.hyper, rng);
      acc.actor_loss += st.actor_loss;
      acc.entropy += st.entropy;
    }
    stats.actor_loss = acc.actor_loss / n_slots;
    stats.entropy = acc.entropy / n_slots;
  }

  double closs = 0.0;
  for (int s = 0; s < n_slots; ++s)
    closs += critic_fit(critics_[s], critic_opt_[s], buf.state, ret[s],
                        opt_.hyper, rng);
  stats.critic_loss = closs / n_slots;
  return stats;
}

std::vector<std::pair<std::string, std::vector<double>>> PgTrainer::to_blobs()
    const {
  std::vector<std::pair<std::string, std::vector<double>>> blobs;
  char name[96];
  for (size_t s = 0; s < actors_.size(); ++s) {
    const ActorPolicy& a = actors_[s];
    for (size_t l = 0; l < a.net.layers.size(); ++l) {
      std::snprintf(name, sizeof(name), "actor%zu/l%zu/W", s, l);
      blobs.emplace_back(name, a.net.layers[l].W.a);
      std::snprintf(name, sizeof(name), "actor%zu/l%zu/b", s, l);
      blobs.emplace_back(name, a.net.layers[l].b);
    }
    if (a.head == HeadKind::Gauss) {
      std::snprintf(name, sizeof(name), "actor%zu/log_std", s);
      blobs.emplace_back(name, a.log_std);
    }
  }
  for (size_t s = 0; s < critics_.size(); ++s) {
    for (size_t l = 0; l < critics_[s].layers.size(); ++l) {
      std::snprintf(name, sizeof(name), "critic%zu/l%zu/W", s, l);
      blobs.emplace_back(name, critics_[s].layers[l].W.a);
      std::snprintf(name, sizeof(name), "critic%zu/l%zu/b", s, l);
      blobs.emplace_back(name, critics_[s].layers[l].b);
    }
  }
  return blobs;
}

void PgTrainer::from_blobs(
    const std::vector<std::pair<std::string, std::vector<double>>>& blobs) {
  const std::vector<std::pair<std::string, std::vector<double>>> want =
      to_blobs();
  if (blobs.size() != want.size())
    throw std::runtime_error("checkpoint blob count mismatch");
  size_t i = 0;
  auto take = [&](std::vector<double>& dst, const std::string& nm) {
    if (blobs[i].first != nm || blobs[i].second.size() != dst.size())
      throw std::runtime_error("checkpoint blob mismatch at " + nm);
    dst = blobs[i].second;
    ++i;
  };
  char name[96];
  for (size_t s = 0; s < actors_.size(); ++s) {
    ActorPolicy& a = actors_[s];
    for (size_t l = 0; l < a.net.layers.size(); ++l) {
      std::snprintf(name, sizeof(name), "actor%zu/l%zu/W", s, l);
      take(a.net.layers[l].W.a, name);
      std::snprintf(name, sizeof(name), "actor%zu/l%zu/b", s, l);
      take(a.net.layers[l].b, name);
    }
    if (a.head == HeadKind::Gauss) {
      std::snprintf(name, sizeof(name), "actor%zu/log_std", s);
      take(a.log_std, name);
    }
  }
  for (size_t s = 0; s < critics_.size(); ++s) {
    for (size_t l = 0; l < critics_[s].layers.size(); ++l) {
      std::snprintf(name, sizeof(name), "critic%zu/l%zu/W", s, l);
      take(critics_[s].layers[l].W.a, name);
      std::snprintf(name, sizeof(name), "critic%zu/l%zu/b", s, l);
      take(critics_[s].layers[l].b, name);
    }
  }
}

}  // namespace wdtn
