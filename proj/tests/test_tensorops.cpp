#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "subdisc/rng.hpp"
#include "subdisc/tensorops.hpp"

using namespace subdisc;

namespace {

Tensor3 random_tensor(Rng& rng, int D, int J, int L) {
  Tensor3 t(D, J, L);
  for (auto& x : t.v) x = rng.uniform01();
  return t;
}

Matrix random_matrix(Rng& rng, int r, int c) {
  Matrix m(r, c);
  for (auto& x : m.v) x = rng.uniform01();
  return m;
}

}  // namespace

TEST_CASE("conv_forward frozen single-factor example") {
  Tensor3 O(1, 1, 2);
  O(0, 0, 0) = 1.0;
  O(0, 0, 1) = 2.0;
  Matrix H(1, 4);
  H(0, 0) = 1.0;
  H(0, 1) = 0.0;
  H(0, 2) = 1.0;
  H(0, 3) = 0.0;
  Matrix X = conv_forward(O, H);
  REQUIRE(X.rows == 1);
  REQUIRE(X.cols == 4);
  CHECK(X(0, 0) == 1.0);
  CHECK(X(0, 1) == 2.0);
  CHECK(X(0, 2) == 1.0);
  CHECK(X(0, 3) == 2.0);
}

TEST_CASE("conv_transpose frozen single-factor example") {
  Tensor3 O(1, 1, 2);
  O(0, 0, 0) = 1.0;
  O(0, 0, 1) = 2.0;
  Matrix X(1, 4);
  X(0, 0) = 1.0;
  X(0, 1) = 2.0;
  X(0, 2) = 1.0;
  X(0, 3) = 2.0;
  Matrix W = conv_transpose(O, X);
  CHECK(W(0, 0) == 5.0);
  CHECK(W(0, 1) == 4.0);
  CHECK(W(0, 2) == 5.0);
  CHECK(W(0, 3) == 2.0);
}

TEST_CASE("conv operators match the literal triple-loop sums") {
  Rng rng(20240811);
  for (int rep = 0; rep < 40; ++rep) {
    const int D = 1 + rng.uniform_int(5);
    const int J = 1 + rng.uniform_int(4);
    const int L = 1 + rng.uniform_int(6);
    const int T = 1 + rng.uniform_int(20);
    Tensor3 O = random_tensor(rng, D, J, L);
    Matrix H = random_matrix(rng, J, T);
    Matrix X = random_matrix(rng, D, T);

    CHECK(max_abs_diff(conv_forward(O, H), oracle::conv_forward(O, H)) < 1e-12);
    CHECK(max_abs_diff(conv_transpose(O, X), oracle::conv_transpose(O, X)) < 1e-12);
  }
}

TEST_CASE("conv_transpose is the adjoint of conv_forward") {
  Rng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    const int D = 1 + rng.uniform_int(4);
    const int J = 1 + rng.uniform_int(4);
    const int L = 1 + rng.uniform_int(5);
    const int T = L + rng.uniform_int(15);
    Tensor3 O = random_tensor(rng, D, J, L);
    Matrix H = random_matrix(rng, J, T);
    Matrix X = random_matrix(rng, D, T);
    const double lhs = oracle::inner(conv_forward(O, H), X);
    const double rhs = oracle::inner(H, conv_transpose(O, X));
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("conv_forward with L=1 equals a plain matrix product") {
  Rng rng(3);
  Tensor3 O = random_tensor(rng, 4, 3, 1);
  Matrix H = random_matrix(rng, 3, 9);
  Matrix X = conv_forward(O, H);
  Matrix ref = oracle::matmul(O.lag_slice(0), H);
  CHECK(max_abs_diff(X, ref) < 1e-13);
}

TEST_CASE("shift_columns basic behavior") {
  Matrix M(1, 3);
  M(0, 0) = 1.0;
  M(0, 1) = 2.0;
  M(0, 2) = 3.0;

  Matrix right = shift_columns(M, 1);
  CHECK(right(0, 0) == 0.0);
  CHECK(right(0, 1) == 1.0);
  CHECK(right(0, 2) == 2.0);

  Matrix left = shift_columns(M, -1);
  CHECK(left(0, 0) == 2.0);
  CHECK(left(0, 1) == 3.0);
  CHECK(left(0, 2) == 0.0);

  Matrix zero = shift_columns(M, 0);
  CHECK(max_abs_diff(zero, M) == 0.0);

  Matrix gone = shift_columns(M, 5);
  CHECK(frobenius_sq(gone) == 0.0);
}

TEST_CASE("shifting right then left recovers the interior") {
  Rng rng(9);
  Matrix M = random_matrix(rng, 3, 12);
  Matrix back = shift_columns(shift_columns(M, 4), -4);
  for (int r = 0; r < M.rows; ++r)
    for (int c = 0; c < M.cols - 4; ++c) CHECK(back(r, c) == M(r, c));
  for (int r = 0; r < M.rows; ++r)
    for (int c = M.cols - 4; c < M.cols; ++c) CHECK(back(r, c) == 0.0);
}

TEST_CASE("smoothing_matrix frozen T=3 L=2 band") {
  Matrix S = smoothing_matrix(3, 2);
  const double expect[3][3] = {{1, 1, 0}, {1, 1, 1}, {0, 1, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(S(i, j) == expect[i][j]);
}

TEST_CASE("smoothing_matrix with L=1 is the identity") {
  Matrix S = smoothing_matrix(5, 1);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(S(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("smooth_columns equals explicit multiplication by the band matrix") {
  Rng rng(15);
  for (int rep = 0; rep < 10; ++rep) {
    const int rows = 1 + rng.uniform_int(4);
    const int T = 2 + rng.uniform_int(30);
    const int L = 1 + rng.uniform_int(8);
    Matrix M = random_matrix(rng, rows, T);
    Matrix fast = smooth_columns(M, L);
    Matrix ref = oracle::matmul(M, smoothing_matrix(T, L));
    CHECK(max_abs_diff(fast, ref) < 1e-11);
  }
}

TEST_CASE("mult_bt equals A * B^T") {
  Rng rng(21);
  Matrix A = random_matrix(rng, 4, 17);
  Matrix B = random_matrix(rng, 6, 17);
  Matrix ref = oracle::matmul(A, oracle::transpose(B));
  CHECK(max_abs_diff(mult_bt(A, B), ref) < 1e-12);
}

TEST_CASE("matrix CSV round trip is bit exact") {
  Rng rng(5);
  Matrix M(3, 7);
  for (auto& x : M.v) x = rng.normal(0.0, 3.0);
  M(0, 0) = 0.0;
  M(1, 1) = -1.0 / 3.0;
  std::ostringstream out;
  write_matrix_csv(M, out);
  std::istringstream in(out.str());
  Matrix back = read_matrix_csv(in);
  REQUIRE(back.same_shape(M));
  for (size_t i = 0; i < M.v.size(); ++i) CHECK(back.v[i] == M.v[i]);
}

TEST_CASE("tensor CSV round trip is bit exact") {
  Rng rng(6);
  Tensor3 t(2, 3, 4);
  for (auto& x : t.v) x = rng.normal();
  std::ostringstream out;
  write_tensor_csv(t, out);
  std::istringstream in(out.str());
  Tensor3 back = read_tensor_csv(in);
  REQUIRE(back.D == t.D);
  REQUIRE(back.J == t.J);
  REQUIRE(back.L == t.L);
  for (size_t i = 0; i < t.v.size(); ++i) CHECK(back.v[i] == t.v[i]);
}

TEST_CASE("lag_slice round trip") {
  Rng rng(8);
  Tensor3 t = random_tensor(rng, 3, 2, 5);
  Tensor3 copy(3, 2, 5);
  for (int l = 0; l < 5; ++l) copy.set_lag_slice(l, t.lag_slice(l));
  CHECK(max_abs_diff(t, copy) == 0.0);
}

TEST_CASE("rng streams are reproducible and distinct across seeds") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform01();
    all_equal = all_equal && x == b.uniform01();
    any_diff = any_diff || x != c.uniform01();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("rng normal moments are sane") {
  Rng rng(1234);
  double sum = 0.0, sumsq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("rng uniform_int stays in range and covers values") {
  Rng rng(99);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const int k = rng.uniform_int(7);
    REQUIRE(k >= 0);
    REQUIRE(k < 7);
    ++counts[static_cast<size_t>(k)];
  }
  for (int k = 0; k < 7; ++k) CHECK(counts[static_cast<size_t>(k)] > 700);
}

TEST_CASE("sample_without_replacement yields distinct indices") {
  Rng rng(7);
  auto idx = rng.sample_without_replacement(50, 15);
  REQUIRE(idx.size() == 15);
  std::vector<bool> seen(50, false);
  for (int i : idx) {
    REQUIRE(i >= 0);
    REQUIRE(i < 50);
    REQUIRE(!seen[static_cast<size_t>(i)]);
    seen[static_cast<size_t>(i)] = true;
  }
}
