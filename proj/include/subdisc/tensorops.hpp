#pragma once
// Convolution operators for the factorization X ~ O (*) H, where O is a
// D x J x L bank of lagged patterns and H a J x T activation matrix.  Time
// indices are zero-based; terms whose time index falls outside [0, T) are
// zero (zero-padded edges).

#include <algorithm>
#include <stdexcept>

#include "subdisc/matrix.hpp"

namespace subdisc {

// X[d,t] = sum_j sum_l O(d,j,l) * H(j, t-l).
inline Matrix conv_forward(const Tensor3& O, const Matrix& H) {
  if (O.J != H.rows) throw std::invalid_argument("conv_forward: factor count mismatch");
  const int T = H.cols;
  Matrix X(O.D, T, 0.0);
  for (int d = 0; d < O.D; ++d) {
    double* xr = X.row(d);
    for (int j = 0; j < O.J; ++j) {
      const double* hr = H.row(j);
      for (int l = 0; l < O.L && l < T; ++l) {
        const double coef = O(d, j, l);
        if (coef == 0.0) continue;
        for (int t = l; t < T; ++t) xr[t] += coef * hr[t - l];
      }
    }
  }
  return X;
}

// W[j,t] = sum_l sum_d O(d,j,l) * X(d, t+l).  Adjoint of conv_forward:
// <conv_forward(O,H), X> == <H, conv_transpose(O,X)>.
inline Matrix conv_transpose(const Tensor3& O, const Matrix& X) {
  if (O.D != X.rows) throw std::invalid_argument("conv_transpose: channel count mismatch");
  const int T = X.cols;
  Matrix W(O.J, T, 0.0);
  for (int j = 0; j < O.J; ++j) {
    double* wr = W.row(j);
    for (int d = 0; d < O.D; ++d) {
      const double* xr = X.row(d);
      for (int l = 0; l < O.L && l < T; ++l) {
        const double coef = O(d, j, l);
        if (coef == 0.0) continue;
        const int tmax = T - l;
        for (int t = 0; t < tmax; ++t) wr[t] += coef * xr[t + l];
      }
    }
  }
  return W;
}

// Shift every row by s columns: positive s moves content toward later time,
// vacated columns become zero.
inline Matrix shift_columns(const Matrix& M, int s) {
  Matrix out(M.rows, M.cols, 0.0);
  for (int r = 0; r < M.rows; ++r) {
    const double* src = M.row(r);
    double* dst = out.row(r);
    for (int c = 0; c < M.cols; ++c) {
      const int from = c - s;
      if (from >= 0 && from < M.cols) dst[c] = src[from];
    }
  }
  return out;
}

inline double frobenius_sq(const Matrix& m) {
  double s = 0.0;
  for (double x : m.v) s += x * x;
  return s;
}

// T x T band matrix with ones where |i - j| < L, zero elsewhere.  Only used
// directly at small T; the engine goes through smooth_columns instead.
inline Matrix smoothing_matrix(int T, int L) {
  if (T < 1 || L < 1) throw std::invalid_argument("smoothing_matrix: T and L must be positive");
  Matrix S(T, T, 0.0);
  for (int i = 0; i < T; ++i) {
    const int lo = std::max(0, i - L + 1);
    const int hi = std::min(T - 1, i + L - 1);
    for (int j = lo; j <= hi; ++j) S(i, j) = 1.0;
  }
  return S;
}

// M * smoothing_matrix(M.cols, L) computed as per-row sliding window sums,
// O(rows * T) instead of O(rows * T^2).
inline Matrix smooth_columns(const Matrix& M, int L) {
  if (L < 1) throw std::invalid_argument("smooth_columns: L must be positive");
  const int T = M.cols;
  Matrix out(M.rows, T, 0.0);
  std::vector<double> prefix(static_cast<size_t>(T) + 1, 0.0);
  for (int r = 0; r < M.rows; ++r) {
    const double* src = M.row(r);
    for (int t = 0; t < T; ++t) prefix[t + 1] = prefix[t] + src[t];
    double* dst = out.row(r);
    for (int t = 0; t < T; ++t) {
      const int lo = std::max(0, t - L + 1);
      const int hi = std::min(T - 1, t + L - 1);
      dst[t] = prefix[hi + 1] - prefix[lo];
    }
  }
  return out;
}

// A * B^T for row-major operands: (rows_a x T) * (rows_b x T)^T -> rows_a x rows_b.
inline Matrix mult_bt(const Matrix& A, const Matrix& B) {
  if (A.cols != B.cols) throw std::invalid_argument("mult_bt: inner dimension mismatch");
  Matrix out(A.rows, B.rows, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    const double* ar = A.row(i);
    for (int k = 0; k < B.rows; ++k) {
      const double* br = B.row(k);
      double s = 0.0;
      for (int t = 0; t < A.cols; ++t) s += ar[t] * br[t];
      out(i, k) = s;
    }
  }
  return out;
}

}  // namespace subdisc
