#pragma once
// Reference implementations used only by the tests.  Each one is a direct
// transcription of the defining sum, written with no regard for efficiency
// and sharing no code with the library implementations it checks.

#include <cmath>
#include <vector>

#include "subdisc/matrix.hpp"

namespace oracle {

inline subdisc::Matrix conv_forward(const subdisc::Tensor3& O, const subdisc::Matrix& H) {
  subdisc::Matrix X(O.D, H.cols, 0.0);
  for (int d = 0; d < O.D; ++d)
    for (int t = 0; t < H.cols; ++t) {
      double s = 0.0;
      for (int j = 0; j < O.J; ++j)
        for (int l = 0; l < O.L; ++l)
          if (t - l >= 0) s += O(d, j, l) * H(j, t - l);
      X(d, t) = s;
    }
  return X;
}

inline subdisc::Matrix conv_transpose(const subdisc::Tensor3& O, const subdisc::Matrix& X) {
  subdisc::Matrix W(O.J, X.cols, 0.0);
  for (int j = 0; j < O.J; ++j)
    for (int t = 0; t < X.cols; ++t) {
      double s = 0.0;
      for (int l = 0; l < O.L; ++l)
        for (int d = 0; d < O.D; ++d)
          if (t + l < X.cols) s += O(d, j, l) * X(d, t + l);
      W(j, t) = s;
    }
  return W;
}

inline subdisc::Matrix matmul(const subdisc::Matrix& A, const subdisc::Matrix& B) {
  subdisc::Matrix C(A.rows, B.cols, 0.0);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < B.cols; ++k) {
      double s = 0.0;
      for (int j = 0; j < A.cols; ++j) s += A(i, j) * B(j, k);
      C(i, k) = s;
    }
  return C;
}

inline subdisc::Matrix transpose(const subdisc::Matrix& A) {
  subdisc::Matrix T(A.cols, A.rows, 0.0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

inline double inner(const subdisc::Matrix& A, const subdisc::Matrix& B) {
  double s = 0.0;
  for (size_t i = 0; i < A.v.size(); ++i) s += A.v[i] * B.v[i];
  return s;
}

}  // namespace oracle
