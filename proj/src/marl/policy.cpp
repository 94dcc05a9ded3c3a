#include "wdtn/marl/policy.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace wdtn {

ActorPolicy make_actor(HeadKind head, int obs_dim, int dims, int cats,
                       const std::vector<int>& hidden, double log_std_init,
                       RngStream& init) {
  ActorPolicy a;
  a.head = head;
  a.dims = dims;
  a.cats = cats;
  std::vector<int> sizes;
  sizes.push_back(obs_dim);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(a.out_dim());
  a.net = DenseNet(sizes, init, 0.01);
  if (head == HeadKind::Gauss) a.log_std.assign(dims, log_std_init);
  a.opt = make_adam(a.net);
  a.opt_log_std = AdamParam{};
  return a;
}

ActorEval actor_eval(const ActorPolicy& a, const Matrix& obs,
                     const Matrix& raw) {
  ActorEval ev;
  ev.out = a.net.forward(obs, &ev.cache);
  switch (a.head) {
    case HeadKind::Beta: {
      ev.bb = beta_eval(ev.out, raw);
      ev.logp = ev.bb.logp;
      ev.entropy = ev.bb.entropy;
      break;
    }
    case HeadKind::Gauss: {
      ev.gb = gauss_eval(ev.out, a.log_std, raw);
      ev.logp = ev.gb.logp;
      ev.entropy = ev.gb.entropy;
      break;
    }
    case HeadKind::Cat: {
      ev.cb = cat_eval(ev.out, a.dims, a.cats, raw);
      ev.logp = ev.cb.logp;
      ev.entropy = ev.cb.entropy;
      break;
    }
  }
  return ev;
}

ActorGrads make_actor_grads(const ActorPolicy& a) {
  ActorGrads g;
  g.g = a.net.make_grads();
  if (a.head == HeadKind::Gauss) g.dlog_std.assign(a.dims, 0.0);
  return g;
}

void actor_backward(const ActorPolicy& a, const ActorEval& ev,
                    const Matrix& raw, const std::vector<double>& dlogp,
                    const std::vector<double>& dent, ActorGrads& grads) {
  Matrix dout;
  switch (a.head) {
    case HeadKind::Beta:
      dout = beta_backward(ev.out, ev.bb, raw, dlogp, dent);
      break;
    case HeadKind::Gauss:
      dout = gauss_backward(ev.out, ev.gb, a.log_std, raw, dlogp, dent,
                            grads.dlog_std);
      break;
    case HeadKind::Cat:
      dout = cat_backward(ev.cb, a.dims, a.cats, raw, dlogp, dent);
      break;
  }
  grads.g.zero();
  a.net.backward(ev.cache, dout, grads.g);
}

void actor_adam(ActorPolicy& a, const ActorGrads& grads, double lr) {
  adam_step(a.net, grads.g, a.opt, lr);
  if (a.head == HeadKind::Gauss)
    adam_step_vec(a.log_std, grads.dlog_std, a.opt_log_std, lr);
}

BatchSample actor_sample_eval(const ActorPolicy& a, const Matrix& obs,
                              std::vector<RngStream*>& rngs) {
  const int B = obs.rows;
  assert(static_cast<int>(rngs.size()) == B);
  BatchSample s;
  s.raw.resize(B);
  s.exec.resize(B);
  Matrix out = a.net.forward(obs);
  // A diverged optimizer can poison the network with inf/NaN weights; catch
  // that here, before sampling, so the caller can abort with a diagnostic
  // instead of feeding undefined actions downstream.
  for (double v : out.a) {
    if (!std::isfinite(v))
      throw std::runtime_error("policy network produced non-finite outputs");
  }
  Matrix raw_m(B, a.dims);
  for (int i = 0; i < B; ++i) {
    switch (a.head) {
      case HeadKind::Beta: {
        s.raw[i] = beta_sample_row(out.row(i), a.dims, *rngs[i]);
        s.exec[i] = s.raw[i];
        break;
      }
      case HeadKind::Gauss: {
        GaussSample gs = gauss_sample_row(out.row(i), a.log_std, a.dims,
                                          *rngs[i]);
        s.raw[i] = gs.raw;
        s.exec[i] = gs.exec;
        s.clips += gs.clips;
        break;
      }
      case HeadKind::Cat: {
        s.raw[i] = cat_sample_row(out.row(i), a.dims, a.cats, *rngs[i]);
        s.exec[i] = s.raw[i];
        break;
      }
    }
    for (int d = 0; d < a.dims; ++d) raw_m.at(i, d) = s.raw[i][d];
  }
  switch (a.head) {
    case HeadKind::Beta:
      s.logp = beta_eval(out, raw_m).logp;
      break;
    case HeadKind::Gauss:
      s.logp = gauss_eval(out, a.log_std, raw_m).logp;
      break;
    case HeadKind::Cat:
      s.logp = cat_eval(out, a.dims, a.cats, raw_m).logp;
      break;
  }
  return s;
}

std::vector<double> actor_act_mean(const ActorPolicy& a,
                                   const std::vector<double>& obs) {
  Matrix x(1, static_cast<int>(obs.size()));
  for (size_t j = 0; j < obs.size(); ++j) x.a[j] = obs[j];
  Matrix out = a.net.forward(x);
  switch (a.head) {
    case HeadKind::Beta: return beta_mean_row(out.row(0), a.dims);
    case HeadKind::Gauss: return gauss_mean_row(out.row(0), a.dims);
    case HeadKind::Cat: return cat_argmax_row(out.row(0), a.dims, a.cats);
  }
  return {};
}

}  // namespace wdtn
