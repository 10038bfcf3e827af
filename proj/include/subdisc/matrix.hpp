#pragma once
// Dense row-major matrix and rank-3 tensor value types.  Shapes involved in
// this library are small (a handful of rows, up to a few tens of thousands
// of columns), so plain std::vector storage is enough; no external
// linear-algebra dependency.

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "subdisc/csv.hpp"

namespace subdisc {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;  // row-major, size rows*cols

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {
    if (r < 1 || c < 1) throw std::invalid_argument("Matrix: dimensions must be positive");
  }

  double& operator()(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

  double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Lag-indexed factor bank: D channels x J factors x L lags.
struct Tensor3 {
  int D = 0, J = 0, L = 0;
  std::vector<double> v;  // index (d, j, l) -> (d*J + j)*L + l

  Tensor3() = default;
  Tensor3(int d, int j, int l, double fill = 0.0)
      : D(d), J(j), L(l), v(static_cast<size_t>(d) * j * l, fill) {
    if (d < 1 || j < 1 || l < 1) throw std::invalid_argument("Tensor3: dimensions must be positive");
  }

  double& operator()(int d, int j, int l) {
    return v[(static_cast<size_t>(d) * J + j) * L + l];
  }
  double operator()(int d, int j, int l) const {
    return v[(static_cast<size_t>(d) * J + j) * L + l];
  }

  // D x J matrix holding lag l of every (channel, factor) pair.
  Matrix lag_slice(int l) const {
    Matrix m(D, J);
    for (int d = 0; d < D; ++d)
      for (int j = 0; j < J; ++j) m(d, j) = (*this)(d, j, l);
    return m;
  }

  void set_lag_slice(int l, const Matrix& m) {
    if (m.rows != D || m.cols != J)
      throw std::invalid_argument("set_lag_slice: shape mismatch");
    for (int d = 0; d < D; ++d)
      for (int j = 0; j < J; ++j) (*this)(d, j, l) = m(d, j);
  }
};

inline bool is_finite(const Matrix& m) {
  for (double x : m.v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool is_finite(const Tensor3& t) {
  for (double x : t.v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool is_nonnegative(const Matrix& m) {
  for (double x : m.v)
    if (x < 0.0) return false;
  return true;
}

inline bool is_nonnegative(const Tensor3& t) {
  for (double x : t.v)
    if (x < 0.0) return false;
  return true;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  if (a.D != b.D || a.J != b.J || a.L != b.L)
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

// One matrix row per line, comma separated, no header.
inline void write_matrix_csv(const Matrix& m, std::ostream& out) {
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      if (c) out << ',';
      out << fmt_double(m(r, c));
    }
    out << '\n';
  }
}

inline Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("read_matrix_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("read_matrix_csv: empty input");
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) m(r, c) = rows[r][c];
  return m;
}

// "D J L" header, then L matrix blocks (D rows x J cols) separated by one
// blank line.
inline void write_tensor_csv(const Tensor3& t, std::ostream& out) {
  out << t.D << ' ' << t.J << ' ' << t.L << '\n';
  for (int l = 0; l < t.L; ++l) {
    if (l) out << '\n';
    for (int d = 0; d < t.D; ++d) {
      for (int j = 0; j < t.J; ++j) {
        if (j) out << ',';
        out << fmt_double(t(d, j, l));
      }
      out << '\n';
    }
  }
}

inline Tensor3 read_tensor_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("read_tensor_csv: missing header");
  std::istringstream hs(header);
  int D = 0, J = 0, L = 0;
  if (!(hs >> D >> J >> L)) throw std::invalid_argument("read_tensor_csv: bad header");
  Tensor3 t(D, J, L);
  std::string line;
  int l = 0, d = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (l >= L) throw std::invalid_argument("read_tensor_csv: extra data");
    auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != J)
      throw std::invalid_argument("read_tensor_csv: bad row width");
    for (int j = 0; j < J; ++j) t(d, j, l) = parse_double(cells[j]);
    if (++d == D) {
      d = 0;
      ++l;
    }
  }
  if (l != L || d != 0) throw std::invalid_argument("read_tensor_csv: truncated data");
  return t;
}

inline void save_matrix_csv(const Matrix& m, const std::string& path) {
  std::ostringstream ss;
  write_matrix_csv(m, ss);
  write_text_file(path, ss.str());
}

inline Matrix load_matrix_csv(const std::string& path) {
  std::istringstream ss(read_text_file(path));
  return read_matrix_csv(ss);
}

inline void save_tensor_csv(const Tensor3& t, const std::string& path) {
  std::ostringstream ss;
  write_tensor_csv(t, ss);
  write_text_file(path, ss.str());
}

inline Tensor3 load_tensor_csv(const std::string& path) {
  std::istringstream ss(read_text_file(path));
  return read_tensor_csv(ss);
}

}  // namespace subdisc
