#include "wdtn/neural/net.hpp"

#include <cassert>
#include <cmath>

namespace wdtn {

void DenseNet::Grads::zero() {
  for (LayerGrads& lg : layer) {
    lg.dW.zero();
    lg.db.assign(lg.db.size(), 0.0);
  }
}

DenseNet::DenseNet(const std::vector<int>& sizes, RngStream& rng,
                   double out_scale) {
  assert(sizes.size() >= 2);
  layers.resize(sizes.size() - 1);
  for (size_t l = 0; l < layers.size(); ++l) {
    int in = sizes[l], out = sizes[l + 1];
    layers[l].W = Matrix(in, out);
    layers[l].b.assign(static_cast<size_t>(out), 0.0);
    double limit = std::sqrt(6.0 / (in + out));
    if (l + 1 == layers.size()) limit *= out_scale;
    for (double& w : layers[l].W.a) w = rng.uniform(-limit, limit);
  }
}

Matrix DenseNet::forward(const Matrix& X, Cache* cache) const {
  assert(X.cols == in_dim());
  if (cache) {
    cache->input = X;
    cache->act.clear();
  }
  Matrix cur = X;
  for (size_t l = 0; l < layers.size(); ++l) {
    const Layer& ly = layers[l];
    Matrix z(cur.rows, ly.W.cols);
    matmul(cur, ly.W, z);
    for (int i = 0; i < z.rows; ++i) {
      double* zi = z.row(i);
      for (int j = 0; j < z.cols; ++j) zi[j] += ly.b[j];
    }
    if (l + 1 < layers.size()) {
      for (double& v : z.a) v = std::tanh(v);
      if (cache) cache->act.push_back(z);
    }
    cur = std::move(z);
  }
  return cur;
}

void DenseNet::backward(const Cache& cache, const Matrix& dY, Grads& g,
                        Matrix* dX) const {
  assert(g.layer.size() == layers.size());
  Matrix dz = dY;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const Matrix& input = l == 0 ? cache.input : cache.act[l - 1];
    LayerGrads& lg = g.layer[l];
    add_at_b(input, dz, lg.dW);
    for (int i = 0; i < dz.rows; ++i) {
      const double* di = dz.row(i);
      for (int j = 0; j < dz.cols; ++j) lg.db[j] += di[j];
    }
    if (l == 0) {
      if (dX) {
        *dX = Matrix(dz.rows, layers[0].W.rows);
        matmul_bt(dz, layers[0].W, *dX);
      }
      break;
    }
    Matrix da(dz.rows, layers[l].W.rows);
    matmul_bt(dz, layers[l].W, da);
    const Matrix& act = cache.act[l - 1];
    for (size_t i = 0; i < da.a.size(); ++i)
      da.a[i] *= 1.0 - act.a[i] * act.a[i];
    dz = std::move(da);
  }
}

DenseNet::Grads DenseNet::make_grads() const {
  Grads g;
  g.layer.resize(layers.size());
  for (size_t l = 0; l < layers.size(); ++l) {
    g.layer[l].dW = Matrix(layers[l].W.rows, layers[l].W.cols);
    g.layer[l].db.assign(layers[l].b.size(), 0.0);
  }
  return g;
}

AdamNet make_adam(const DenseNet& net) {
  AdamNet a;
  a.w.resize(net.layers.size());
  a.b.resize(net.layers.size());
  for (size_t l = 0; l < net.layers.size(); ++l) {
    a.w[l].m.assign(net.layers[l].W.a.size(), 0.0);
    a.w[l].v.assign(net.layers[l].W.a.size(), 0.0);
    a.b[l].m.assign(net.layers[l].b.size(), 0.0);
    a.b[l].v.assign(net.layers[l].b.size(), 0.0);
  }
  return a;
}

namespace {

void adam_update(double* p, const double* g, AdamTensor& s, size_t n, long t,
                 double lr, double b1, double b2, double eps) {
  double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (size_t i = 0; i < n; ++i) {
    s.m[i] = b1 * s.m[i] + (1.0 - b1) * g[i];
    s.v[i] = b2 * s.v[i] + (1.0 - b2) * g[i] * g[i];
    double mhat = s.m[i] / c1;
    double vhat = s.v[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

void adam_step(DenseNet& net, const DenseNet::Grads& g, AdamNet& opt, double lr,
               double beta1, double beta2, double eps) {
  ++opt.t;
  for (size_t l = 0; l < net.layers.size(); ++l) {
    adam_update(net.layers[l].W.a.data(), g.layer[l].dW.a.data(), opt.w[l],
                net.layers[l].W.a.size(), opt.t, lr, beta1, beta2, eps);
    adam_update(net.layers[l].b.data(), g.layer[l].db.data(), opt.b[l],
                net.layers[l].b.size(), opt.t, lr, beta1, beta2, eps);
  }
}

void adam_step_vec(std::vector<double>& param, const std::vector<double>& grad,
                   AdamParam& opt, double lr, double beta1, double beta2,
                   double eps) {
  if (opt.s.m.empty()) {
    opt.s.m.assign(param.size(), 0.0);
    opt.s.v.assign(param.size(), 0.0);
  }
  ++opt.t;
  adam_update(param.data(), grad.data(), opt.s, param.size(), opt.t, lr, beta1,
              beta2, eps);
}

}  // namespace wdtn
