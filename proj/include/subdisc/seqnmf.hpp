#pragma once
// Regularized convolutional NMF: X ~ O (*) H with multiplicative updates.
// Three penalties shape H toward a bank of binary, sparse, mutually
// distinct activation rows: r_bin pulls entries to {0,1}, r_1 thins them,
// r_sim charges factors for explaining the same stretch of data.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "subdisc/rng.hpp"
#include "subdisc/tensorops.hpp"

namespace subdisc {

struct SeqNmfConfig {
  int J = 3;  // number of patterns
  int L = 3;  // pattern length in steps
  double lambda_bin = 1e-2;
  double lambda_1 = 1e-3;
  double lambda_sim = 1e-4;
  int max_iter = 300;
  // The binarity penalty only enters the H update from this iteration on;
  // early iterations fit freely so the penalty snaps an already-formed H
  // instead of freezing the random init.
  int start_bin_loss_iter = 30;
  double tolerance = 1e-7;     // convergence threshold, relative to the initial total
  double epsilon_div = 1e-10;  // update denominators never drop below this
  // The sparsity gradient used here couples factors, (ones - I) * H; set
  // this to use the plain elementwise subgradient of |H| instead.
  bool l1_ones_gradient = false;
  uint64_t seed = 0;
  // Multiplicative updates only converge locally and the basin depends on
  // the initial draw.  The fit runs this many restarts from seeds derived
  // deterministically from `seed` and keeps the best one.
  int n_restarts = 12;
};

inline void validate_config(const SeqNmfConfig& cfg) {
  if (cfg.J < 1 || cfg.L < 1) throw std::invalid_argument("seqnmf: J and L must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("seqnmf: max_iter must be positive");
  if (cfg.lambda_bin < 0 || cfg.lambda_1 < 0 || cfg.lambda_sim < 0)
    throw std::invalid_argument("seqnmf: penalty weights must be nonnegative");
  if (!(cfg.epsilon_div > 0)) throw std::invalid_argument("seqnmf: epsilon_div must be positive");
  if (cfg.tolerance < 0) throw std::invalid_argument("seqnmf: tolerance must be nonnegative");
  if (cfg.n_restarts < 1) throw std::invalid_argument("seqnmf: n_restarts must be positive");
}

struct LossBreakdown {
  double reconstruction = 0.0;
  double r_bin = 0.0;
  double r_1 = 0.0;
  double r_sim = 0.0;
  double total = 0.0;
};

struct FitResult {
  Tensor3 O;
  Matrix H;
  std::vector<LossBreakdown> loss_trace;  // entry 0 is the pre-update loss
  int iterations_run = 0;
  bool converged = false;
};

// Factors start strictly positive: multiplicative updates can never revive
// an exact zero.  The scale makes E[O (*) H] match mean_x, so the first
// reconstruction starts at the data's magnitude instead of drowning it.
inline std::pair<Tensor3, Matrix> init_factors(int D, int J, int L, int T, double mean_x,
                                               uint64_t seed) {
  if (D < 1 || J < 1 || L < 1 || T < 1)
    throw std::invalid_argument("init_factors: dimensions must be positive");
  const double scale =
      2.0 * std::sqrt(std::max(mean_x, 1e-12) / (static_cast<double>(J) * static_cast<double>(L)));
  Rng rng(seed);
  Tensor3 O(D, J, L);
  for (auto& v : O.v) v = scale * rng.uniform_pos();
  Matrix H(J, T);
  for (auto& v : H.v) v = scale * rng.uniform_pos();
  return {std::move(O), std::move(H)};
}

namespace detail {

// On unit-normalized inputs the configured penalty weights sit two to three
// orders of magnitude below the update's data term, which leaves the
// penalties decorative: fits converge to dense interpolating activations
// instead of sparse binary ones.  The update rules therefore apply these
// fixed gains to the penalty gradients; the loss keeps the configured
// weights.  The raw L1 and similarity gradients grow with the number of
// competing factors and the smoothing-window width respectively, so those
// two gains are divided by (J-1) and (2L-1) at use, turning the row and
// window sums into means; without that, a calibration at one problem size
// crushes factors at another (J=5, L=40 collapses to a single survivor).
// Calibrated once on the 3-step color corpus, used unchanged everywhere.
constexpr double kGainBin = 200.0;
constexpr double kGainL1 = 1400.0;
constexpr double kGainSim = 50.0;

inline void check_shapes(const Matrix& X, const Tensor3& O, const Matrix& H) {
  if (O.D != X.rows || O.J != H.rows || H.cols != X.cols)
    throw std::invalid_argument("seqnmf: factor shapes disagree with the data");
}

// (ones - I) * M, computed as column sums minus the own row.
inline Matrix offdiag_rowsum(const Matrix& M) {
  Matrix out(M.rows, M.cols, 0.0);
  std::vector<double> colsum(static_cast<size_t>(M.cols), 0.0);
  for (int r = 0; r < M.rows; ++r) {
    const double* src = M.row(r);
    for (int c = 0; c < M.cols; ++c) colsum[static_cast<size_t>(c)] += src[c];
  }
  for (int r = 0; r < M.rows; ++r) {
    const double* src = M.row(r);
    double* dst = out.row(r);
    for (int c = 0; c < M.cols; ++c) dst[c] = colsum[static_cast<size_t>(c)] - src[c];
  }
  return out;
}

}  // namespace detail

inline LossBreakdown loss(const Matrix& X, const Tensor3& O, const Matrix& H,
                          const SeqNmfConfig& cfg, const std::vector<uint8_t>& col_mask = {}) {
  detail::check_shapes(X, O, H);
  if (!col_mask.empty() && static_cast<int>(col_mask.size()) != X.cols)
    throw std::invalid_argument("loss: mask length disagrees with the data");

  LossBreakdown lb;
  const Matrix Xhat = conv_forward(O, H);
  for (int d = 0; d < X.rows; ++d) {
    const double* xr = X.row(d);
    const double* hr = Xhat.row(d);
    for (int t = 0; t < X.cols; ++t) {
      if (!col_mask.empty() && !col_mask[static_cast<size_t>(t)]) continue;
      const double e = xr[t] - hr[t];
      lb.reconstruction += e * e;
    }
  }

  if (cfg.lambda_bin > 0) {
    double s = 0.0;
    for (double h : H.v) {
      const double b = h * (1.0 - h);
      s += b * b;
    }
    lb.r_bin = cfg.lambda_bin * s;
  }
  if (cfg.lambda_1 > 0) {
    double s = 0.0;
    for (double h : H.v) s += std::abs(h);
    lb.r_1 = cfg.lambda_1 * s;
  }
  if (cfg.lambda_sim > 0 && O.J > 1) {
    const Matrix WS = smooth_columns(conv_transpose(O, X), O.L);
    const Matrix M = mult_bt(WS, H);  // J x J
    double s = 0.0;
    for (int i = 0; i < M.rows; ++i)
      for (int j = 0; j < M.cols; ++j)
        if (i != j) s += std::abs(M(i, j));
    lb.r_sim = cfg.lambda_sim * s;
  }
  lb.total = lb.reconstruction + lb.r_bin + lb.r_1 + lb.r_sim;
  return lb;
}

// Penalty gradient with respect to H.  Entries may be negative (the binary
// penalty changes sign at 1/2); the update clips them at zero before they
// reach a denominator.
inline Matrix grad_reg_H(const Matrix& X, const Tensor3& O, const Matrix& H,
                         const SeqNmfConfig& cfg, int iter) {
  detail::check_shapes(X, O, H);
  Matrix G(H.rows, H.cols, 0.0);

  if (cfg.lambda_bin > 0 && iter >= cfg.start_bin_loss_iter) {
    const double w = cfg.lambda_bin * detail::kGainBin;
    for (size_t i = 0; i < H.v.size(); ++i) {
      const double h = H.v[i], u = 1.0 - h;
      G.v[i] += w * (h * u * u - h * h * u);
    }
  }
  if (cfg.lambda_1 > 0) {
    if (cfg.l1_ones_gradient) {
      const double w = cfg.lambda_1 * detail::kGainL1;
      for (auto& g : G.v) g += w;
    } else if (H.rows > 1) {
      const double w = cfg.lambda_1 * (detail::kGainL1 / (H.rows - 1));
      const Matrix R = detail::offdiag_rowsum(H);
      for (size_t i = 0; i < H.v.size(); ++i) G.v[i] += w * R.v[i];
    }
  }
  if (cfg.lambda_sim > 0 && O.J > 1) {
    const double w = cfg.lambda_sim * (detail::kGainSim / (2 * O.L - 1));
    const Matrix WS = smooth_columns(conv_transpose(O, X), O.L);
    const Matrix R = detail::offdiag_rowsum(WS);
    for (size_t i = 0; i < G.v.size(); ++i) G.v[i] += w * R.v[i];
  }
  return G;
}

// Penalty gradient with respect to lag slice l of O.  Only the
// cross-similarity term touches O.
inline Matrix grad_reg_O(const Matrix& X, const Matrix& H, const SeqNmfConfig& cfg, int l) {
  if (H.cols != X.cols) throw std::invalid_argument("grad_reg_O: length mismatch");
  if (l < 0 || l >= cfg.L) throw std::invalid_argument("grad_reg_O: lag out of range");
  Matrix G(X.rows, H.rows, 0.0);
  if (cfg.lambda_sim <= 0 || H.rows < 2) return G;

  const Matrix XS = smooth_columns(shift_columns(X, -l), cfg.L);
  const Matrix M = mult_bt(XS, H);  // D x J
  // Right-multiplying by (ones - I) replaces each column with the sum of
  // the others.
  const double w = cfg.lambda_sim * detail::kGainSim;
  for (int d = 0; d < M.rows; ++d) {
    double rowsum = 0.0;
    for (int j = 0; j < M.cols; ++j) rowsum += M(d, j);
    for (int j = 0; j < M.cols; ++j) G(d, j) = w * (rowsum - M(d, j));
  }
  return G;
}

inline Matrix update_H(const Matrix& X, const Tensor3& O, const Matrix& H,
                       const SeqNmfConfig& cfg, int iter) {
  detail::check_shapes(X, O, H);
  const Matrix num = conv_transpose(O, X);
  const Matrix den = conv_transpose(O, conv_forward(O, H));
  const Matrix G = grad_reg_H(X, O, H, cfg, iter);

  // The penalty gradient enters the denominator with its sign: positive
  // values brake an entry, negative values (the binary penalty above 1/2)
  // let it grow toward 1.  The floor keeps the denominator positive, so the
  // update can never flip an entry's sign.
  Matrix out(H.rows, H.cols);
  for (size_t i = 0; i < H.v.size(); ++i)
    out.v[i] = H.v[i] * num.v[i] / std::max(den.v[i] + G.v[i], cfg.epsilon_div);
  return out;
}

// Lag slices update in order, each against the reconstruction left by the
// previous slices; the running X~ is patched in place instead of being
// recomputed per lag.
inline Tensor3 update_O(const Matrix& X, const Tensor3& O, const Matrix& H,
                        const SeqNmfConfig& cfg) {
  detail::check_shapes(X, O, H);
  if (O.J != cfg.J || O.L != cfg.L)
    throw std::invalid_argument("update_O: factor bank disagrees with the config");
  const int T = X.cols;
  Matrix Xhat = conv_forward(O, H);
  Tensor3 out = O;

  for (int l = 0; l < O.L; ++l) {
    const Matrix Hl = shift_columns(H, l);
    const Matrix num = mult_bt(X, Hl);
    const Matrix den = mult_bt(Xhat, Hl);
    const Matrix G = grad_reg_O(X, H, cfg, l);
    for (int d = 0; d < O.D; ++d) {
      double* xr = Xhat.row(d);
      for (int j = 0; j < O.J; ++j) {
        const double next =
            out(d, j, l) * num(d, j) / std::max(den(d, j) + G(d, j), cfg.epsilon_div);
        const double delta = next - out(d, j, l);
        if (delta != 0.0) {
          const double* hr = H.row(j);
          for (int t = l; t < T; ++t) xr[t] += delta * hr[t - l];
        }
        out(d, j, l) = next;
      }
    }
  }
  return out;
}

// Scales each factor so its H row peaks at exactly 1, with the inverse
// scale folded into O; the product O (*) H is unchanged.  Returns the count
// of all-zero H rows, which are left alone.
inline int renormalize(Tensor3& O, Matrix& H) {
  int zero_rows = 0;
  for (int j = 0; j < H.rows; ++j) {
    double m = 0.0;
    const double* hr = H.row(j);
    for (int t = 0; t < H.cols; ++t) m = std::max(m, hr[t]);
    if (m <= 0.0) {
      ++zero_rows;
      continue;
    }
    double* hw = H.row(j);
    for (int t = 0; t < H.cols; ++t) hw[t] /= m;
    for (int d = 0; d < O.D; ++d)
      for (int l = 0; l < O.L; ++l) O(d, j, l) *= m;
  }
  return zero_rows;
}

namespace detail {

struct SingleFit {
  Tensor3 O;
  Matrix H;
  std::vector<LossBreakdown> trace;
  bool converged = false;
  int next_iter = 1;  // iteration index the loop stopped at
};

inline SingleFit fit_single(const Matrix& X, const SeqNmfConfig& cfg,
                            const std::vector<uint8_t>& col_mask, double mean_x, uint64_t seed) {
  SingleFit run;
  auto [O, H] = init_factors(X.rows, cfg.J, cfg.L, X.cols, mean_x, seed);
  run.trace.push_back(loss(X, O, H, cfg, col_mask));

  const double tol_abs = cfg.tolerance * run.trace.front().total;
  int iter = 1;
  for (; iter <= cfg.max_iter; ++iter) {
    H = update_H(X, O, H, cfg, iter);
    renormalize(O, H);
    O = update_O(X, O, H, cfg);
    if (!is_finite(O) || !is_finite(H))
      throw std::runtime_error("fit: factors became non-finite at iteration " +
                               std::to_string(iter));
    assert(is_nonnegative(O) && is_nonnegative(H));
    run.trace.push_back(loss(X, O, H, cfg, col_mask));
    const size_t n = run.trace.size();
    if (std::abs(run.trace[n - 1].total - run.trace[n - 2].total) < tol_abs) {
      run.converged = true;
      ++iter;
      break;
    }
  }
  run.O = std::move(O);
  run.H = std::move(H);
  run.next_iter = iter;
  return run;
}

// Restart selection weighs reconstruction against binarity only.  The L1
// term measures model size rather than quality (an activation row that
// misses onsets scores better on it), and the similarity term barely moves
// between basins, so both are left out.  The binarity coefficient has to
// outweigh basin-to-basin reconstruction luck, which spans a few hundred
// units on the color corpora; with lambda_bin = 0 the score falls back to
// plain reconstruction.
constexpr double kSelectBin = 400.0;

inline double restart_score(const LossBreakdown& lb) {
  return lb.reconstruction + kSelectBin * lb.r_bin;
}

}  // namespace detail

inline FitResult fit(const Matrix& X, const SeqNmfConfig& cfg,
                     const std::vector<uint8_t>& col_mask = {}) {
  validate_config(cfg);
  for (double x : X.v)
    if (!(x >= 0.0 && x <= 1.0))
      throw std::invalid_argument("fit: X must be normalized to [0,1]");
  if (!col_mask.empty() && static_cast<int>(col_mask.size()) != X.cols)
    throw std::invalid_argument("fit: mask length disagrees with the data");

  double mean_x = 0.0;
  int n_data = 0;
  for (int d = 0; d < X.rows; ++d) {
    const double* xr = X.row(d);
    for (int t = 0; t < X.cols; ++t) {
      if (!col_mask.empty() && !col_mask[static_cast<size_t>(t)]) continue;
      mean_x += xr[t];
      ++n_data;
    }
  }
  mean_x /= std::max(n_data, 1);

  // Restart seeds step from cfg.seed by a fixed stride, so the whole fit is
  // a pure function of the config.  Restart 0 uses cfg.seed itself.
  std::vector<detail::SingleFit> runs;
  runs.reserve(static_cast<size_t>(cfg.n_restarts));
  for (int r = 0; r < cfg.n_restarts; ++r) {
    const uint64_t seed_r = cfg.seed + static_cast<uint64_t>(r) * 0x9E3779B97F4A7C15ull;
    runs.push_back(detail::fit_single(X, cfg, col_mask, mean_x, seed_r));
  }

  // A restart can collapse: most of the activation mass dies and the little
  // that remains happens to look binary, so the score alone would crown it.
  // Runs whose activation mass falls below half the pool median are
  // optimization failures, not candidate models, and are skipped (the full
  // pool is kept when every run collapses the same way, e.g. lambda_1 = 0).
  std::vector<double> mass;
  mass.reserve(runs.size());
  for (const auto& run : runs) mass.push_back(run.trace.back().r_1);
  std::vector<double> sorted_mass = mass;
  std::nth_element(sorted_mass.begin(), sorted_mass.begin() + sorted_mass.size() / 2,
                   sorted_mass.end());
  const double mass_floor = 0.5 * sorted_mass[sorted_mass.size() / 2];

  size_t best_idx = runs.size();
  double best_score = 0.0;
  for (size_t r = 0; r < runs.size(); ++r) {
    if (mass[r] < mass_floor) continue;
    const double score = detail::restart_score(runs[r].trace.back());
    if (best_idx == runs.size() || score < best_score) {
      best_idx = r;
      best_score = score;
    }
  }
  detail::SingleFit best = std::move(runs[best_idx]);
  runs.clear();

  // One last pass with every penalty off lets the reconstruction settle
  // where the penalties had been leaning on it.  The pattern bank moves
  // first so it absorbs the mean activation gain; the activations then
  // center on 1 instead of on their row maximum, and no renormalization
  // follows, so entries may finish slightly above 1.
  SeqNmfConfig plain = cfg;
  plain.lambda_bin = plain.lambda_1 = plain.lambda_sim = 0.0;
  Tensor3 O = std::move(best.O);
  Matrix H = std::move(best.H);
  O = update_O(X, O, H, plain);
  H = update_H(X, O, H, plain, best.next_iter);
  if (!is_finite(O) || !is_finite(H))
    throw std::runtime_error("fit: factors became non-finite in the final update");
  assert(is_nonnegative(O) && is_nonnegative(H));

  FitResult res;
  res.loss_trace = std::move(best.trace);
  res.loss_trace.push_back(loss(X, O, H, plain, col_mask));
  res.converged = best.converged;
  res.O = std::move(O);
  res.H = std::move(H);
  res.iterations_run = static_cast<int>(res.loss_trace.size()) - 1;
  return res;
}

// ---- fit directory serialization ----

inline nlohmann::json to_json(const SeqNmfConfig& cfg) {
  return {{"J", cfg.J},
          {"L", cfg.L},
          {"lambda_bin", cfg.lambda_bin},
          {"lambda_1", cfg.lambda_1},
          {"lambda_sim", cfg.lambda_sim},
          {"max_iter", cfg.max_iter},
          {"start_bin_loss_iter", cfg.start_bin_loss_iter},
          {"tolerance", cfg.tolerance},
          {"epsilon_div", cfg.epsilon_div},
          {"l1_ones_gradient", cfg.l1_ones_gradient},
          {"seed", cfg.seed},
          {"n_restarts", cfg.n_restarts}};
}

inline SeqNmfConfig seqnmf_config_from_json(const nlohmann::json& j) {
  SeqNmfConfig cfg;
  cfg.J = j.at("J").get<int>();
  cfg.L = j.at("L").get<int>();
  cfg.lambda_bin = j.at("lambda_bin").get<double>();
  cfg.lambda_1 = j.at("lambda_1").get<double>();
  cfg.lambda_sim = j.at("lambda_sim").get<double>();
  cfg.max_iter = j.at("max_iter").get<int>();
  cfg.start_bin_loss_iter = j.at("start_bin_loss_iter").get<int>();
  cfg.tolerance = j.at("tolerance").get<double>();
  cfg.epsilon_div = j.at("epsilon_div").get<double>();
  if (j.contains("l1_ones_gradient")) cfg.l1_ones_gradient = j.at("l1_ones_gradient").get<bool>();
  cfg.seed = j.at("seed").get<uint64_t>();
  if (j.contains("n_restarts")) cfg.n_restarts = j.at("n_restarts").get<int>();
  return cfg;
}

inline void save_fit(const FitResult& res, const SeqNmfConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_tensor_csv(res.O, (fs::path(dir) / "O.csv").string());
  save_matrix_csv(res.H, (fs::path(dir) / "H.csv").string());

  std::ostringstream trace;
  trace << "iter,reconstruction,r_bin,r_1,r_sim,total\n";
  for (size_t i = 0; i < res.loss_trace.size(); ++i) {
    const LossBreakdown& lb = res.loss_trace[i];
    trace << i << ',' << fmt_double(lb.reconstruction) << ',' << fmt_double(lb.r_bin) << ','
          << fmt_double(lb.r_1) << ',' << fmt_double(lb.r_sim) << ',' << fmt_double(lb.total)
          << '\n';
  }
  write_text_file((fs::path(dir) / "loss_trace.csv").string(), trace.str());

  nlohmann::json j = to_json(cfg);
  j["iterations_run"] = res.iterations_run;
  j["converged"] = res.converged;
  write_text_file((fs::path(dir) / "config.json").string(), j.dump(2) + "\n");
}

inline FitResult load_fit(const std::string& dir, SeqNmfConfig* cfg_out = nullptr) {
  namespace fs = std::filesystem;
  FitResult res;
  res.O = load_tensor_csv((fs::path(dir) / "O.csv").string());
  res.H = load_matrix_csv((fs::path(dir) / "H.csv").string());

  const nlohmann::json j =
      nlohmann::json::parse(read_text_file((fs::path(dir) / "config.json").string()));
  res.iterations_run = j.at("iterations_run").get<int>();
  res.converged = j.at("converged").get<bool>();
  if (cfg_out) *cfg_out = seqnmf_config_from_json(j);

  const std::string body = read_text_file((fs::path(dir) / "loss_trace.csv").string());
  std::istringstream in(body);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) throw std::runtime_error("load_fit: bad loss trace row");
    LossBreakdown lb;
    lb.reconstruction = parse_double(cells[1]);
    lb.r_bin = parse_double(cells[2]);
    lb.r_1 = parse_double(cells[3]);
    lb.r_sim = parse_double(cells[4]);
    lb.total = parse_double(cells[5]);
    res.loss_trace.push_back(lb);
  }
  if (static_cast<int>(res.loss_trace.size()) != res.iterations_run + 1)
    throw std::runtime_error("load_fit: loss trace length disagrees with iteration count");
  return res;
}

}  // namespace subdisc
