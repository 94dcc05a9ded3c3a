#include "wdtn/marl/maddpg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wdtn {

namespace {

constexpr double kBoxLo = 1e-6;
constexpr double kBoxHi = 1.0 - 1e-6;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string slot_label(const char* what, size_t slot) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "init-%s-%zu", what, slot);
  return std::string(buf);
}

}  // namespace

MaddpgTrainer::MaddpgTrainer(const std::vector<AgentSpec>& specs,
                             int state_dim, const MaddpgOptions& opt,
                             std::uint64_t seed)
    : specs_(specs),
      state_dim_(state_dim),
      opt_(opt),
      replay_(0, 1)  // re-initialized below once widths are known
{
  const int A = static_cast<int>(specs_.size());
  obs_off_.resize(A);
  act_off_.resize(A);
  act_width_.resize(A);
  for (int i = 0; i < A; ++i) {
    obs_off_[i] = obs_total_;
    obs_total_ += specs_[i].obs_dim;
    act_off_[i] = joint_dim_;
    act_width_[i] = specs_[i].n_cats > 0
                        ? specs_[i].act_dim * specs_[i].n_cats
                        : specs_[i].act_dim;
    joint_dim_ += act_width_[i];
  }
  replay_ = ReplayBuffer(2 * state_dim_ + 2 * obs_total_ + joint_dim_ + 2,
                         opt_.replay_capacity);

  for (int i = 0; i < A; ++i) {
    std::vector<int> sizes;
    sizes.push_back(specs_[i].obs_dim);
    for (int h : opt_.hidden) sizes.push_back(h);
    sizes.push_back(act_width_[i]);
    RngStream init = split_stream(seed, slot_label("det-actor", i));
    actors_.emplace_back(sizes, init, 0.01);
    actor_opt_.push_back(make_adam(actors_.back()));
  }
  tgt_actors_ = actors_;

  std::vector<int> csizes;
  csizes.push_back(state_dim_ + joint_dim_);
  for (int h : opt_.hidden) csizes.push_back(h);
  csizes.push_back(1);
  RngStream cinit = split_stream(seed, "init-central-critic");
  critic_ = DenseNet(csizes, cinit);
  tgt_critic_ = critic_;
  critic_opt_ = make_adam(critic_);
}

std::vector<double> MaddpgTrainer::flatten_obs(const Observations& o) const {
  std::vector<double> flat(obs_total_);
  int at = 0;
  for (const std::vector<double>& v : o.per_agent)
    for (double x : v) flat[at++] = x;
  assert(at == obs_total_);
  return flat;
}

void MaddpgTrainer::act_explore(const Observations& obs, double sigma,
                                double temp, RngStream& rng,
                                ActionSet& act_out,
                                std::vector<double>& joint_out) const {
  const int A = static_cast<int>(specs_.size());
  act_out.assign(A, {});
  joint_out.assign(joint_dim_, 0.0);
  for (int i = 0; i < A; ++i) {
    const AgentSpec& sp = specs_[i];
    Matrix x(1, sp.obs_dim);
    for (int j = 0; j < sp.obs_dim; ++j) x.a[j] = obs.per_agent[i][j];
    Matrix out = actors_[i].forward(x);
    if (sp.n_cats == 0) {
      act_out[i].resize(sp.act_dim);
      for (int d = 0; d < sp.act_dim; ++d) {
        const double a =
            std::clamp(sigmoid(out.a[d]) + sigma * rng.normal(), kBoxLo,
                       kBoxHi);
        act_out[i][d] = a;
        joint_out[act_off_[i] + d] = a;
      }
    } else {
      // Relaxed-categorical exploration: perturb logits with Gumbel noise at
      // the current temperature and execute the argmax (hard sample).
      act_out[i].resize(sp.act_dim);
      for (int g = 0; g < sp.act_dim; ++g) {
        int best = 0;
        double best_v = -1e300;
        for (int c = 0; c < sp.n_cats; ++c) {
          const double u = std::max(rng.uniform(), 1e-300);
          const double gum = -std::log(-std::log(u));
          const double v = (out.a[g * sp.n_cats + c] + gum) / temp;
          if (v > best_v) {
            best_v = v;
            best = c;
          }
        }
        act_out[i][g] = static_cast<double>(best);
        joint_out[act_off_[i] + g * sp.n_cats + best] = 1.0;
      }
    }
  }
}

ActionSet MaddpgTrainer::act_eval(const Observations& obs) const {
  const int A = static_cast<int>(specs_.size());
  ActionSet act(A);
  for (int i = 0; i < A; ++i) {
    const AgentSpec& sp = specs_[i];
    Matrix x(1, sp.obs_dim);
    for (int j = 0; j < sp.obs_dim; ++j) x.a[j] = obs.per_agent[i][j];
    Matrix out = actors_[i].forward(x);
    if (sp.n_cats == 0) {
      act[i].resize(sp.act_dim);
      for (int d = 0; d < sp.act_dim; ++d)
        act[i][d] = std::clamp(sigmoid(out.a[d]), kBoxLo, kBoxHi);
    } else {
      act[i].resize(sp.act_dim);
      for (int g = 0; g < sp.act_dim; ++g) {
        int best = 0;
        for (int c = 1; c < sp.n_cats; ++c)
          if (out.a[g * sp.n_cats + c] > out.a[g * sp.n_cats + best]) best = c;
        act[i][g] = static_cast<double>(best);
      }
    }
  }
  return act;
}

void MaddpgTrainer::push(const Observations& pre,
                         const std::vector<double>& joint, double reward,
                         const Observations& post, bool done) {
  assert(static_cast<int>(joint.size()) == joint_dim_);
  std::vector<double> row(replay_.width());
  int at = 0;
  for (double v : pre.global_state) row[at++] = v;
  for (double v : post.global_state) row[at++] = v;
  const std::vector<double> fo = flatten_obs(pre);
  for (double v : fo) row[at++] = v;
  const std::vector<double> fn = flatten_obs(post);
  for (double v : fn) row[at++] = v;
  for (double v : joint) row[at++] = v;
  row[at++] = reward;
  row[at++] = done ? 1.0 : 0.0;
  assert(at == replay_.width());
  replay_.push(row.data());
}

void MaddpgTrainer::target_joint_row(const double* next_obs_row,
                                     double* joint) const {
  const int A = static_cast<int>(specs_.size());
  for (int j = 0; j < joint_dim_; ++j) joint[j] = 0.0;
  for (int i = 0; i < A; ++i) {
    const AgentSpec& sp = specs_[i];
    Matrix x(1, sp.obs_dim);
    for (int j = 0; j < sp.obs_dim; ++j) x.a[j] = next_obs_row[obs_off_[i] + j];
    Matrix out = tgt_actors_[i].forward(x);
    if (sp.n_cats == 0) {
      for (int d = 0; d < sp.act_dim; ++d)
        joint[act_off_[i] + d] = std::clamp(sigmoid(out.a[d]), kBoxLo, kBoxHi);
    } else {
      for (int g = 0; g < sp.act_dim; ++g) {
        int best = 0;
        for (int c = 1; c < sp.n_cats; ++c)
          if (out.a[g * sp.n_cats + c] > out.a[g * sp.n_cats + best]) best = c;
        joint[act_off_[i] + g * sp.n_cats + best] = 1.0;
      }
    }
  }
}

std::vector<double> MaddpgTrainer::debug_targets(
    const std::vector<long>& idx) const {
  const int B = static_cast<int>(idx.size());
  const int S = state_dim_;
  Matrix xn(B, S + joint_dim_);
  std::vector<double> r(B), dn(B);
  std::vector<double> joint(joint_dim_);
  for (int b = 0; b < B; ++b) {
    const double* row = replay_.row(idx[b]);
    const double* ns = row + S;
    const double* nobs = row + 2 * S + obs_total_;
    r[b] = row[2 * S + 2 * obs_total_ + joint_dim_];
    dn[b] = row[2 * S + 2 * obs_total_ + joint_dim_ + 1];
    target_joint_row(nobs, joint.data());
    for (int j = 0; j < S; ++j) xn.at(b, j) = ns[j];
    for (int j = 0; j < joint_dim_; ++j) xn.at(b, S + j) = joint[j];
  }
  Matrix qn = tgt_critic_.forward(xn);
  std::vector<double> y(B);
  for (int b = 0; b < B; ++b)
    y[b] = r[b] + opt_.gamma * (1.0 - dn[b]) * qn.at(b, 0);
  return y;
}

bool MaddpgTrainer::update(RngStream& rng, double temp, MaddpgStats* stats) {
  if (replay_.size() < std::max<long>(opt_.batch, opt_.warmup)) return false;
  const int B = opt_.batch;
  const int S = state_dim_;
  const std::vector<long> idx = sample_distinct(replay_.size(), B, rng);
  const std::vector<double> y = debug_targets(idx);

  // Critic regression toward the frozen targets.
  Matrix xc(B, S + joint_dim_);
  for (int b = 0; b < B; ++b) {
    const double* row = replay_.row(idx[b]);
    for (int j = 0; j < S; ++j) xc.at(b, j) = row[j];
    const double* act = row + 2 * S + 2 * obs_total_;
    for (int j = 0; j < joint_dim_; ++j) xc.at(b, S + j) = act[j];
  }
  DenseNet::Cache cache;
  Matrix q = critic_.forward(xc, &cache);
  Matrix dq(B, 1);
  double closs = 0.0;
  for (int b = 0; b < B; ++b) {
    const double diff = q.at(b, 0) - y[b];
    closs += diff * diff / B;
    dq.at(b, 0) = 2.0 * diff / B;
  }
  DenseNet::Grads cg = critic_.make_grads();
  critic_.backward(cache, dq, cg);
  adam_step(critic_, cg, critic_opt_, opt_.critic_lr);

  // Each actor ascends Q through its own action block, other blocks replayed.
  const int A = static_cast<int>(specs_.size());
  double aloss = 0.0;
  for (int i = 0; i < A; ++i) {
    const AgentSpec& sp = specs_[i];
    Matrix xo(B, sp.obs_dim);
    for (int b = 0; b < B; ++b) {
      const double* o = replay_.row(idx[b]) + 2 * S + obs_off_[i];
      for (int j = 0; j < sp.obs_dim; ++j) xo.at(b, j) = o[j];
    }
    DenseNet::Cache acache;
    Matrix out = actors_[i].forward(xo, &acache);

    Matrix xa = xc;  // replayed joint actions; block i replaced below
    Matrix soft;     // controller: relaxed sample per row/group
    if (sp.n_cats == 0) {
      for (int b = 0; b < B; ++b)
        for (int d = 0; d < sp.act_dim; ++d)
          xa.at(b, S + act_off_[i] + d) = sigmoid(out.at(b, d));
    } else {
      soft = Matrix(B, act_width_[i]);
      for (int b = 0; b < B; ++b) {
        for (int g = 0; g < sp.act_dim; ++g) {
          double mx = -1e300;
          std::vector<double> z(sp.n_cats);
          for (int c = 0; c < sp.n_cats; ++c) {
            const double u = std::max(rng.uniform(), 1e-300);
            z[c] = (out.at(b, g * sp.n_cats + c) - std::log(-std::log(u))) /
                   temp;
            mx = std::max(mx, z[c]);
          }
          double sum = 0.0;
          for (int c = 0; c < sp.n_cats; ++c) {
            z[c] = std::exp(z[c] - mx);
            sum += z[c];
          }
          int best = 0;
          for (int c = 0; c < sp.n_cats; ++c) {
            z[c] /= sum;
            soft.at(b, g * sp.n_cats + c) = z[c];
            if (z[c] > z[best]) best = c;
          }
          // Straight-through: execute the hard one-hot, backprop the soft.
          for (int c = 0; c < sp.n_cats; ++c)
            xa.at(b, S + act_off_[i] + g * sp.n_cats + c) =
                c == best ? 1.0 : 0.0;
        }
      }
    }

    DenseNet::Cache ccache;
    Matrix qa = critic_.forward(xa, &ccache);
    double qmean = 0.0;
    for (int b = 0; b < B; ++b) qmean += qa.at(b, 0) / B;
    aloss += -qmean;

    Matrix dqa(B, 1);
    for (int b = 0; b < B; ++b) dqa.at(b, 0) = -1.0 / B;
    DenseNet::Grads scratch = critic_.make_grads();
    Matrix dxa(B, S + joint_dim_);
    critic_.backward(ccache, dqa, scratch, &dxa);

    Matrix dout(B, act_width_[i]);
    if (sp.n_cats == 0) {
      for (int b = 0; b < B; ++b)
        for (int d = 0; d < sp.act_dim; ++d) {
          const double sgm = xa.at(b, S + act_off_[i] + d);
          dout.at(b, d) =
              dxa.at(b, S + act_off_[i] + d) * sgm * (1.0 - sgm);
        }
    } else {
      for (int b = 0; b < B; ++b) {
        for (int g = 0; g < sp.act_dim; ++g) {
          double dot = 0.0;
          for (int c = 0; c < sp.n_cats; ++c)
            dot += dxa.at(b, S + act_off_[i] + g * sp.n_cats + c) *
                   soft.at(b, g * sp.n_cats + c);
          for (int c = 0; c < sp.n_cats; ++c) {
            const double pc = soft.at(b, g * sp.n_cats + c);
            dout.at(b, g * sp.n_cats + c) =
                pc *
                (dxa.at(b, S + act_off_[i] + g * sp.n_cats + c) - dot) / temp;
          }
        }
      }
    }
    DenseNet::Grads ag = actors_[i].make_grads();
    actors_[i].backward(acache, dout, ag);
    adam_step(actors_[i], ag, actor_opt_[i], opt_.actor_lr);
  }

  soft_update(opt_.tau);
  if (stats) {
    stats->critic_loss = closs;
    stats->actor_loss = aloss / A;
  }
  return true;
}

void MaddpgTrainer::soft_update(double tau) {
  auto blend = [tau](DenseNet& tgt, const DenseNet& src) {
    for (size_t l = 0; l < src.layers.size(); ++l) {
      std::vector<double>& tw = tgt.layers[l].W.a;
      const std::vector<double>& sw = src.layers[l].W.a;
      for (size_t j = 0; j < sw.size(); ++j)
        tw[j] = tau * sw[j] + (1.0 - tau) * tw[j];
      std::vector<double>& tb = tgt.layers[l].b;
      const std::vector<double>& sb = src.layers[l].b;
      for (size_t j = 0; j < sb.size(); ++j)
        tb[j] = tau * sb[j] + (1.0 - tau) * tb[j];
    }
  };
  for (size_t i = 0; i < actors_.size(); ++i) blend(tgt_actors_[i], actors_[i]);
  blend(tgt_critic_, critic_);
}

std::vector<std::pair<std::string, std::vector<double>>>
MaddpgTrainer::to_blobs() const {
  std::vector<std::pair<std::string, std::vector<double>>> blobs;
  char name[96];
  auto dump = [&](const DenseNet& net, const char* tag, int slot) {
    for (size_t l = 0; l < net.layers.size(); ++l) {
      std::snprintf(name, sizeof(name), "%s%d/l%zu/W", tag, slot, l);
      blobs.emplace_back(name, net.layers[l].W.a);
      std::snprintf(name, sizeof(name), "%s%d/l%zu/b", tag, slot, l);
      blobs.emplace_back(name, net.layers[l].b);
    }
  };
  for (size_t i = 0; i < actors_.size(); ++i) {
    dump(actors_[i], "actor", static_cast<int>(i));
    dump(tgt_actors_[i], "tgt-actor", static_cast<int>(i));
  }
  dump(critic_, "critic", 0);
  dump(tgt_critic_, "tgt-critic", 0);
  return blobs;
}

void MaddpgTrainer::from_blobs(
    const std::vector<std::pair<std::string, std::vector<double>>>& blobs) {
  size_t i = 0;
  auto take = [&](DenseNet& net, const char* tag, int slot) {
    char name[96];
    for (size_t l = 0; l < net.layers.size(); ++l) {
      std::snprintf(name, sizeof(name), "%s%d/l%zu/W", tag, slot, l);
      if (i >= blobs.size() || blobs[i].first != name ||
          blobs[i].second.size() != net.layers[l].W.a.size())
        throw std::runtime_error(std::string("checkpoint blob mismatch at ") +
                                 name);
      net.layers[l].W.a = blobs[i++].second;
      std::snprintf(name, sizeof(name), "%s%d/l%zu/b", tag, slot, l);
      if (i >= blobs.size() || blobs[i].first != name ||
          blobs[i].second.size() != net.layers[l].b.size())
        throw std::runtime_error(std::string("checkpoint blob mismatch at ") +
                                 name);
      net.layers[l].b = blobs[i++].second;
    }
  };
  for (size_t s = 0; s < actors_.size(); ++s) {
    take(actors_[s], "actor", static_cast<int>(s));
    take(tgt_actors_[s], "tgt-actor", static_cast<int>(s));
  }
  take(critic_, "critic", 0);
  take(tgt_critic_, "tgt-critic", 0);
  if (i != blobs.size())
    throw std::runtime_error("checkpoint blob count mismatch");
}

}  // namespace wdtn
