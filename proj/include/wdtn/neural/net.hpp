#pragma once
// Minimal dense networks: tanh hidden layers, linear output, reverse-mode
// gradients, Adam. Everything is double precision and deterministic given the
// init stream.

#include <vector>

#include "wdtn/neural/matrix.hpp"
#include "wdtn/rng.hpp"

namespace wdtn {

struct Layer {
  Matrix W;               // in x out
  std::vector<double> b;  // out
};

struct LayerGrads {
  Matrix dW;
  std::vector<double> db;
};

class DenseNet {
 public:
  struct Cache {
    Matrix input;
    std::vector<Matrix> act;  // post-tanh activation per hidden layer
  };
  struct Grads {
    std::vector<LayerGrads> layer;
    void zero();
  };

  DenseNet() = default;
  // sizes = {in, hidden..., out}; Xavier-uniform weights (output layer scaled
  // by out_scale), zero biases. Draw order: layer by layer, row-major.
  DenseNet(const std::vector<int>& sizes, RngStream& rng, double out_scale = 1.0);

  int in_dim() const { return layers.empty() ? 0 : layers.front().W.rows; }
  int out_dim() const { return layers.empty() ? 0 : layers.back().W.cols; }

  Matrix forward(const Matrix& X, Cache* cache = nullptr) const;

  // Accumulates into g (call g.zero() first); dY is the gradient at the linear
  // output. dX, when requested, receives the gradient wrt the input batch.
  void backward(const Cache& cache, const Matrix& dY, Grads& g,
                Matrix* dX = nullptr) const;

  Grads make_grads() const;

  std::vector<Layer> layers;
};

struct AdamTensor {
  std::vector<double> m, v;
};

struct AdamNet {
  std::vector<AdamTensor> w, b;
  long t = 0;
};

AdamNet make_adam(const DenseNet& net);

// Bias-corrected Adam; with a fresh optimizer the first step moves every
// parameter by about lr regardless of gradient scale.
void adam_step(DenseNet& net, const DenseNet::Grads& g, AdamNet& opt, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct AdamParam {
  AdamTensor s;
  long t = 0;
};

void adam_step_vec(std::vector<double>& param, const std::vector<double>& grad,
                   AdamParam& opt, double lr, double beta1 = 0.9,
                   double beta2 = 0.999, double eps = 1e-8);

}  // namespace wdtn
