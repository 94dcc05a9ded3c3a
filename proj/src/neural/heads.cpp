#include "wdtn/neural/heads.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

#include "wdtn/neural/special.hpp"

namespace wdtn {

// ---------- Beta ----------

BetaBatch beta_eval(const Matrix& out, const Matrix& actions) {
  const int B = out.rows, D = actions.cols;
  assert(out.cols == 2 * D && actions.rows == B);
  BetaBatch e;
  e.alpha = Matrix(B, D);
  e.beta = Matrix(B, D);
  e.logp.assign(static_cast<size_t>(B), 0.0);
  e.entropy.assign(static_cast<size_t>(B), 0.0);
  for (int i = 0; i < B; ++i) {
    const double* o = out.row(i);
    const double* act = actions.row(i);
    for (int d = 0; d < D; ++d) {
      double al = 1.0 + softplus(o[d]);
      double be = 1.0 + softplus(o[D + d]);
      e.alpha.at(i, d) = al;
      e.beta.at(i, d) = be;
      double a = act[d];
      assert(a > 0.0 && a < 1.0);
      double lnB = std::lgamma(al) + std::lgamma(be) - std::lgamma(al + be);
      e.logp[i] += (al - 1.0) * std::log(a) + (be - 1.0) * std::log1p(-a) - lnB;
      e.entropy[i] += lnB - (al - 1.0) * digamma(al) - (be - 1.0) * digamma(be) +
                      (al + be - 2.0) * digamma(al + be);
    }
  }
  return e;
}

Matrix beta_backward(const Matrix& out, const BetaBatch& eb,
                     const Matrix& actions, const std::vector<double>& dlogp,
                     const std::vector<double>& dent) {
  const int B = out.rows, D = actions.cols;
  Matrix dout(B, 2 * D);
  for (int i = 0; i < B; ++i) {
    const double* o = out.row(i);
    const double* act = actions.row(i);
    double* g = dout.row(i);
    for (int d = 0; d < D; ++d) {
      double al = eb.alpha.at(i, d), be = eb.beta.at(i, d);
      double psi_ab = digamma(al + be);
      double tri_ab = trigamma(al + be);
      double dlp_da = std::log(act[d]) - digamma(al) + psi_ab;
      double dlp_db = std::log1p(-act[d]) - digamma(be) + psi_ab;
      double dH_da = -(al - 1.0) * trigamma(al) + (al + be - 2.0) * tri_ab;
      double dH_db = -(be - 1.0) * trigamma(be) + (al + be - 2.0) * tri_ab;
      g[d] = (dlogp[i] * dlp_da + dent[i] * dH_da) * softplus_derivative(o[d]);
      g[D + d] =
          (dlogp[i] * dlp_db + dent[i] * dH_db) * softplus_derivative(o[D + d]);
    }
  }
  return dout;
}

std::vector<double> beta_sample_row(const double* out_row, int D,
                                    RngStream& rng) {
  std::vector<double> a(static_cast<size_t>(D));
  for (int d = 0; d < D; ++d) {
    double al = 1.0 + softplus(out_row[d]);
    double be = 1.0 + softplus(out_row[D + d]);
    double x = rng.beta(al, be);
    // The support is the open interval (0,1); finite precision can round a
    // draw onto an endpoint (e.g. with extreme concentrations), where the
    // log-density is undefined. Nudge such draws back inside.
    if (x < 1e-6) x = 1e-6;
    if (x > 1.0 - 1e-6) x = 1.0 - 1e-6;
    a[d] = x;
  }
  return a;
}

std::vector<double> beta_mean_row(const double* out_row, int D) {
  std::vector<double> a(static_cast<size_t>(D));
  for (int d = 0; d < D; ++d) {
    double al = 1.0 + softplus(out_row[d]);
    double be = 1.0 + softplus(out_row[D + d]);
    a[d] = al / (al + be);
  }
  return a;
}

// ---------- Gaussian ----------

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5*ln(2*pi)
}

GaussBatch gauss_eval(const Matrix& out, const std::vector<double>& log_std,
                      const Matrix& raw_actions) {
  const int B = out.rows, D = out.cols;
  assert(static_cast<int>(log_std.size()) == D && raw_actions.cols == D);
  GaussBatch e;
  e.mean = Matrix(B, D);
  e.logp.assign(static_cast<size_t>(B), 0.0);
  e.entropy.assign(static_cast<size_t>(B), 0.0);
  double ent = 0.0;
  for (int d = 0; d < D; ++d) ent += log_std[d] + kHalfLog2Pi + 0.5;
  for (int i = 0; i < B; ++i) {
    const double* o = out.row(i);
    const double* x = raw_actions.row(i);
    for (int d = 0; d < D; ++d) {
      double mu = sigmoid(o[d]);
      e.mean.at(i, d) = mu;
      double s = std::exp(log_std[d]);
      double z = (x[d] - mu) / s;
      e.logp[i] += -0.5 * z * z - log_std[d] - kHalfLog2Pi;
    }
    e.entropy[i] = ent;
  }
  return e;
}

Matrix gauss_backward(const Matrix& out, const GaussBatch& gb,
                      const std::vector<double>& log_std,
                      const Matrix& raw_actions,
                      const std::vector<double>& dlogp,
                      const std::vector<double>& dent,
                      std::vector<double>& dlog_std) {
  const int B = out.rows, D = out.cols;
  Matrix dout(B, D);
  dlog_std.assign(static_cast<size_t>(D), 0.0);
  for (int i = 0; i < B; ++i) {
    const double* x = raw_actions.row(i);
    double* g = dout.row(i);
    for (int d = 0; d < D; ++d) {
      double mu = gb.mean.at(i, d);
      double s = std::exp(log_std[d]);
      double z = (x[d] - mu) / s;
      g[d] = dlogp[i] * (z / s) * mu * (1.0 - mu);
      dlog_std[d] += dlogp[i] * (z * z - 1.0) + dent[i];  // dH/dlogsigma = 1
    }
  }
  return dout;
}

GaussSample gauss_sample_row(const double* out_row,
                             const std::vector<double>& log_std, int D,
                             RngStream& rng) {
  GaussSample s;
  s.raw.resize(static_cast<size_t>(D));
  s.exec.resize(static_cast<size_t>(D));
  for (int d = 0; d < D; ++d) {
    double mu = sigmoid(out_row[d]);
    double x = mu + std::exp(log_std[d]) * rng.normal();
    s.raw[d] = x;
    double c = x;
    if (c < 1e-6) c = 1e-6;
    if (c > 1.0 - 1e-6) c = 1.0 - 1e-6;
    if (c != x) ++s.clips;
    s.exec[d] = c;
  }
  return s;
}

std::vector<double> gauss_mean_row(const double* out_row, int D) {
  std::vector<double> a(static_cast<size_t>(D));
  for (int d = 0; d < D; ++d) a[d] = sigmoid(out_row[d]);
  return a;
}

// ---------- Categorical ----------

CatBatch cat_eval(const Matrix& out, int G, int C, const Matrix& actions) {
  const int B = out.rows;
  assert(out.cols == G * C && actions.cols == G);
  CatBatch e;
  e.probs = Matrix(B, G * C);
  e.logp.assign(static_cast<size_t>(B), 0.0);
  e.entropy.assign(static_cast<size_t>(B), 0.0);
  for (int i = 0; i < B; ++i) {
    const double* o = out.row(i);
    double* p = e.probs.row(i);
    for (int g = 0; g < G; ++g) {
      const double* z = o + g * C;
      double zmax = z[0];
      for (int c = 1; c < C; ++c) zmax = std::max(zmax, z[c]);
      double sum = 0.0;
      for (int c = 0; c < C; ++c) sum += std::exp(z[c] - zmax);
      double lse = zmax + std::log(sum);
      double H = 0.0;
      for (int c = 0; c < C; ++c) {
        double lp = z[c] - lse;
        double pc = std::exp(lp);
        p[g * C + c] = pc;
        H -= pc * lp;
      }
      e.entropy[i] += H;
      int j = static_cast<int>(actions.at(i, g));
      assert(j >= 0 && j < C);
      e.logp[i] += z[j] - lse;
    }
  }
  return e;
}

Matrix cat_backward(const CatBatch& cb, int G, int C, const Matrix& actions,
                    const std::vector<double>& dlogp,
                    const std::vector<double>& dent) {
  const int B = cb.probs.rows;
  Matrix dout(B, G * C);
  for (int i = 0; i < B; ++i) {
    const double* p = cb.probs.row(i);
    double* g = dout.row(i);
    for (int gr = 0; gr < G; ++gr) {
      int j = static_cast<int>(actions.at(i, gr));
      double Hgrp = 0.0;
      for (int c = 0; c < C; ++c) {
        double pc = p[gr * C + c];
        if (pc > 0.0) Hgrp -= pc * std::log(pc);
      }
      for (int c = 0; c < C; ++c) {
        double pc = p[gr * C + c];
        double dlp = (c == j ? 1.0 : 0.0) - pc;
        double dH = pc > 0.0 ? -pc * (std::log(pc) + Hgrp) : 0.0;
        g[gr * C + c] = dlogp[i] * dlp + dent[i] * dH;
      }
    }
  }
  return dout;
}

std::vector<double> cat_sample_row(const double* out_row, int G, int C,
                                   RngStream& rng) {
  std::vector<double> idx(static_cast<size_t>(G));
  for (int g = 0; g < G; ++g) {
    const double* z = out_row + g * C;
    double zmax = z[0];
    for (int c = 1; c < C; ++c) zmax = std::max(zmax, z[c]);
    double sum = 0.0;
    for (int c = 0; c < C; ++c) sum += std::exp(z[c] - zmax);
    double u = rng.uniform() * sum;
    double cum = 0.0;
    int pick = C - 1;
    for (int c = 0; c < C; ++c) {
      cum += std::exp(z[c] - zmax);
      if (u < cum) {
        pick = c;
        break;
      }
    }
    idx[g] = static_cast<double>(pick);
  }
  return idx;
}

std::vector<double> cat_argmax_row(const double* out_row, int G, int C) {
  std::vector<double> idx(static_cast<size_t>(G));
  for (int g = 0; g < G; ++g) {
    const double* z = out_row + g * C;
    int best = 0;
    for (int c = 1; c < C; ++c)
      if (z[c] > z[best]) best = c;
    idx[g] = static_cast<double>(best);
  }
  return idx;
}

}  // namespace wdtn
