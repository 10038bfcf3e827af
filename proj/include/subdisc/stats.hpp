#pragma once
// Linear-Gaussian conditional independence backend: partial correlation via
// least-squares residuals with Fisher's z transform, plus Fisher's method
// for combining per-stratum p-values when the conditioning variable is
// discrete.  Chi-squared tails come from Boost.Math's incomplete gamma.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace subdisc {

struct PartialCorrResult {
  double p = 1.0;
  double r = 0.0;
  int n = 0;
  int k = 0;
  // Set when x (or y) has no residual variation after controlling for Z; a
  // variable that the conditioning set already determines cannot witness
  // extra dependence, so p is reported as 1.
  bool degenerate = false;
};

namespace detail {

// Cholesky solve of the (k x k) normal equations; returns false when the
// Gram matrix is numerically singular.
inline bool cholesky_solve(std::vector<double>& A, std::vector<double>& b, int k) {
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = A[static_cast<size_t>(i) * k + j];
      for (int m = 0; m < j; ++m)
        s -= A[static_cast<size_t>(i) * k + m] * A[static_cast<size_t>(j) * k + m];
      if (i == j) {
        if (s <= 1e-12 * std::max(1.0, A[static_cast<size_t>(i) * k + i])) return false;
        A[static_cast<size_t>(i) * k + i] = std::sqrt(s);
      } else {
        A[static_cast<size_t>(i) * k + j] = s / A[static_cast<size_t>(j) * k + j];
      }
    }
  }
  for (int i = 0; i < k; ++i) {
    double s = b[static_cast<size_t>(i)];
    for (int m = 0; m < i; ++m) s -= A[static_cast<size_t>(i) * k + m] * b[static_cast<size_t>(m)];
    b[static_cast<size_t>(i)] = s / A[static_cast<size_t>(i) * k + i];
  }
  for (int i = k - 1; i >= 0; --i) {
    double s = b[static_cast<size_t>(i)];
    for (int m = i + 1; m < k; ++m) s -= A[static_cast<size_t>(m) * k + i] * b[static_cast<size_t>(m)];
    b[static_cast<size_t>(i)] = s / A[static_cast<size_t>(i) * k + i];
  }
  return true;
}

// Residual of v against centered z columns (all inputs already centered).
inline void residualize(std::vector<double>& v, const std::vector<std::vector<double>>& zc,
                        const std::vector<double>& gram) {
  const int k = static_cast<int>(zc.size());
  if (k == 0) return;
  const size_t n = v.size();
  std::vector<double> A = gram;
  std::vector<double> b(static_cast<size_t>(k), 0.0);
  for (int j = 0; j < k; ++j) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += zc[static_cast<size_t>(j)][i] * v[i];
    b[static_cast<size_t>(j)] = s;
  }
  if (!cholesky_solve(A, b, k))
    throw std::invalid_argument("partial_corr: singular conditioning design");
  for (size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (int j = 0; j < k; ++j) fit += b[static_cast<size_t>(j)] * zc[static_cast<size_t>(j)][i];
    v[i] -= fit;
  }
}

inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / 1.4142135623730950488); }

}  // namespace detail

inline PartialCorrResult partial_corr_test(const std::vector<double>& x,
                                           const std::vector<double>& y,
                                           const std::vector<std::vector<double>>& z_cols) {
  const int n = static_cast<int>(x.size());
  const int k = static_cast<int>(z_cols.size());
  if (static_cast<int>(y.size()) != n)
    throw std::invalid_argument("partial_corr: x and y length mismatch");
  for (const auto& z : z_cols)
    if (static_cast<int>(z.size()) != n)
      throw std::invalid_argument("partial_corr: conditioning column length mismatch");
  if (n < k + 4) throw std::invalid_argument("partial_corr: sample too small (need n >= k + 4)");

  // Center everything; centering doubles as the intercept.
  auto centered = [n](const std::vector<double>& v) {
    double m = 0.0;
    for (double t : v) m += t;
    m /= n;
    std::vector<double> out(v);
    for (double& t : out) t -= m;
    return out;
  };
  std::vector<double> xc = centered(x), yc = centered(y);

  // Rescale every centered column to unit sum of squares (zero columns stay
  // zero).  Correlations and the residual-variance ratios below are scale
  // invariant, and a unit-diagonal Gram matrix keeps the normal equations
  // well conditioned when raw columns differ by orders of magnitude.
  auto unit_scale = [](std::vector<double>& v) {
    double ss = 0.0;
    for (double t : v) ss += t * t;
    if (ss > 0.0) {
      const double inv = 1.0 / std::sqrt(ss);
      for (double& t : v) t *= inv;
    }
    return ss;
  };

  // Conditioning columns the centering reduces to rounding dust are
  // constants: they condition on nothing and would only make the Gram
  // matrix singular, so they are dropped and excluded from the degrees of
  // freedom.
  std::vector<std::vector<double>> zc;
  zc.reserve(z_cols.size());
  for (const auto& z : z_cols) {
    std::vector<double> c = centered(z);
    double ssc = 0.0, ssraw = 0.0;
    for (size_t i = 0; i < c.size(); ++i) {
      ssc += c[i] * c[i];
      ssraw += z[i] * z[i];
    }
    if (ssc <= 1e-24 * ssraw) continue;
    unit_scale(c);
    zc.push_back(std::move(c));
  }
  const int ke = static_cast<int>(zc.size());

  std::vector<double> gram;
  if (ke > 0) {
    gram.assign(static_cast<size_t>(ke) * ke, 0.0);
    for (int i = 0; i < ke; ++i)
      for (int j = 0; j <= i; ++j) {
        double s = 0.0;
        for (int t = 0; t < n; ++t)
          s += zc[static_cast<size_t>(i)][static_cast<size_t>(t)] *
               zc[static_cast<size_t>(j)][static_cast<size_t>(t)];
        gram[static_cast<size_t>(i) * ke + j] = s;
        gram[static_cast<size_t>(j) * ke + i] = s;
      }
  }

  const double ssx0 = unit_scale(xc);
  const double ssy0 = unit_scale(yc);

  PartialCorrResult res;
  res.n = n;
  res.k = ke;
  if (ssx0 <= 0.0 || ssy0 <= 0.0) {
    res.degenerate = true;
    return res;
  }

  detail::residualize(xc, zc, gram);
  detail::residualize(yc, zc, gram);

  // Post-scaling the original sums of squares are exactly 1, so these are
  // the residual-variance ratios.
  const double ssx = std::inner_product(xc.begin(), xc.end(), xc.begin(), 0.0);
  const double ssy = std::inner_product(yc.begin(), yc.end(), yc.begin(), 0.0);
  if (ssx <= 1e-12 || ssy <= 1e-12) {
    res.degenerate = true;
    return res;
  }

  double sxy = 0.0;
  for (int t = 0; t < n; ++t) sxy += xc[static_cast<size_t>(t)] * yc[static_cast<size_t>(t)];
  double r = sxy / std::sqrt(ssx * ssy);
  r = std::clamp(r, -1.0, 1.0);
  res.r = r;
  if (std::abs(r) >= 1.0) {
    res.p = 0.0;
    return res;
  }
  const double z = std::atanh(r) * std::sqrt(static_cast<double>(n - ke - 3));
  res.p = detail::normal_two_sided_p(z);
  return res;
}

inline double partial_corr_pvalue(const std::vector<double>& x, const std::vector<double>& y,
                                  const std::vector<std::vector<double>>& z_cols) {
  return partial_corr_test(x, y, z_cols).p;
}

struct StratifiedResult {
  double p = 1.0;
  int used_strata = 0;
  int skipped_strata = 0;
};

// Partial correlation of x and y given extra_Z within each stratum of g,
// combined across strata by Fisher's method (-2 sum ln p ~ chi^2 with 2m
// degrees of freedom).  Strata below the sample floor, in which x or y never
// varies (no information either way), or in which a single observation
// carries nearly all of the variation of x or y (a correlation estimated
// from one influential point is untrustworthy in either direction), are
// skipped and counted.
inline StratifiedResult stratified_ci_test(const std::vector<double>& x,
                                           const std::vector<double>& y,
                                           const std::vector<int>& g,
                                           const std::vector<std::vector<double>>& z_cols) {
  const size_t n = x.size();
  if (y.size() != n || g.size() != n)
    throw std::invalid_argument("stratified_ci: length mismatch");
  const int k = static_cast<int>(z_cols.size());

  std::map<int, std::vector<size_t>> strata;
  for (size_t i = 0; i < n; ++i) strata[g[i]].push_back(i);

  StratifiedResult res;
  double fisher_stat = 0.0;
  for (const auto& [value, idx] : strata) {
    (void)value;
    if (static_cast<int>(idx.size()) < k + 4) {
      ++res.skipped_strata;
      continue;
    }
    std::vector<double> xs, ys;
    xs.reserve(idx.size());
    ys.reserve(idx.size());
    for (size_t i : idx) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
    bool varies = false;
    for (double v : xs) varies = varies || v != xs.front();
    bool y_varies = false;
    for (double v : ys) y_varies = y_varies || v != ys.front();
    if (!varies || !y_varies) {
      ++res.skipped_strata;
      continue;
    }
    auto max_leverage = [](const std::vector<double>& v) {
      double mu = 0.0;
      for (double w : v) mu += w;
      mu /= static_cast<double>(v.size());
      double ss = 0.0, top = 0.0;
      for (double w : v) {
        const double d = (w - mu) * (w - mu);
        ss += d;
        top = std::max(top, d);
      }
      return ss > 0.0 ? top / ss : 1.0;
    };
    if (max_leverage(xs) > 0.9 || max_leverage(ys) > 0.9) {
      ++res.skipped_strata;
      continue;
    }
    std::vector<std::vector<double>> zs(z_cols.size());
    for (size_t j = 0; j < z_cols.size(); ++j) {
      zs[j].reserve(idx.size());
      for (size_t i : idx) zs[j].push_back(z_cols[j][i]);
    }
    const double p = partial_corr_test(xs, ys, zs).p;
    fisher_stat += -2.0 * std::log(std::max(p, 1e-300));
    ++res.used_strata;
  }
  if (res.used_strata == 0)
    throw std::invalid_argument("stratified_ci: no valid stratum");
  res.p = boost::math::gamma_q(static_cast<double>(res.used_strata), fisher_stat / 2.0);
  return res;
}

inline double stratified_ci_pvalue(const std::vector<double>& x, const std::vector<double>& y,
                                   const std::vector<int>& g,
                                   const std::vector<std::vector<double>>& z_cols) {
  return stratified_ci_test(x, y, g, z_cols).p;
}

}  // namespace subdisc
