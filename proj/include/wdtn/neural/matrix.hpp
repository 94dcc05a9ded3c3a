#pragma once
// Row-major double matrices with the three products dense-layer training
// needs. Header-only so the hot loops inline.

#include <cassert>
#include <cstddef>
#include <vector>

namespace wdtn {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
  double& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  void zero() { a.assign(a.size(), 0.0); }
};

// C = A(BxK) * B(KxN); ikj order keeps all three row-major friendly.
inline void matmul(const Matrix& A, const Matrix& B, Matrix& C) {
  assert(A.cols == B.rows && C.rows == A.rows && C.cols == B.cols);
  C.zero();
  const int K = A.cols, N = B.cols;
  for (int i = 0; i < A.rows; ++i) {
    const double* ai = A.row(i);
    double* ci = C.row(i);
    for (int k = 0; k < K; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = B.row(k);
      for (int j = 0; j < N; ++j) ci[j] += aik * bk[j];
    }
  }
}

// C += A^T(KxB)^T... i.e. C(K x N) += A(B x K)^T * G(B x N). Weight gradients.
inline void add_at_b(const Matrix& A, const Matrix& G, Matrix& C) {
  assert(A.rows == G.rows && C.rows == A.cols && C.cols == G.cols);
  const int N = G.cols, K = A.cols;
  for (int b = 0; b < A.rows; ++b) {
    const double* ab = A.row(b);
    const double* gb = G.row(b);
    for (int k = 0; k < K; ++k) {
      const double abk = ab[k];
      if (abk == 0.0) continue;
      double* ck = C.row(k);
      for (int j = 0; j < N; ++j) ck[j] += abk * gb[j];
    }
  }
}

// C = G(B x N) * W(K x N)^T. Input gradients.
inline void matmul_bt(const Matrix& G, const Matrix& W, Matrix& C) {
  assert(G.cols == W.cols && C.rows == G.rows && C.cols == W.rows);
  const int N = G.cols, K = W.rows;
  for (int i = 0; i < G.rows; ++i) {
    const double* gi = G.row(i);
    double* ci = C.row(i);
    for (int k = 0; k < K; ++k) {
      const double* wk = W.row(k);
      double s = 0.0;
      for (int j = 0; j < N; ++j) s += gi[j] * wk[j];
      ci[k] = s;
    }
  }
}

}  // namespace wdtn
