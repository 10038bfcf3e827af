#pragma once
// The three conditional-independence conditions that certify the subgoal as
// a selection variable:
//   (1) s_t and a_t dependent given g_t,
//   (2) g_t and a_{t+1} dependent given g_{t+1},
//   (3) s_{t+1} independent of g_t given (s_t, a_t).
// Each runs under two protocols: single-step (one cross-trajectory test per
// time index) and multi-step (pooled samples, repeated random subsets).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "subdisc/rng.hpp"
#include "subdisc/stats.hpp"
#include "subdisc/trajectory.hpp"

namespace subdisc {

enum class Protocol { single_step, multi_step };
enum class Verdict { dependent, independent, inconclusive };

inline std::string to_string(Protocol p) {
  return p == Protocol::single_step ? "single-step" : "multi-step";
}
inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::dependent: return "dependent";
    case Verdict::independent: return "independent";
    default: return "inconclusive";
  }
}

struct CITestConfig {
  double alpha = 0.01;
  double independence_floor = 0.1;
  int multi_subsets = 20;        // R random subsets in the multi-step protocol
  double multi_fraction = 0.3;   // fraction of pooled samples per subset
  int min_single_n = 30;         // per-t sample floor for the single-step protocol
  // Trajectories have unequal lengths, so late time indices sample only the
  // longest ones.  Which trajectories survive to a given t is itself tied to
  // their latent style, so those strata are biased as well as small; per-t
  // tests are skipped once fewer than this fraction of trajectories remain.
  double survivor_fraction = 0.5;
  uint64_t seed = 0;
};

struct ConditionRecord {
  int condition = 0;
  Protocol protocol = Protocol::single_step;
  double mean_p = 1.0;
  double var_p = 0.0;
  int n_tests = 0;    // tests that entered the mean
  int n_skipped = 0;  // per-t or per-subset tests that could not run
  Verdict verdict = Verdict::inconclusive;
};

struct CITestReport {
  std::vector<ConditionRecord> records;
  bool selection_confirmed = false;
  CITestConfig cfg;
};

namespace detail {

// Pooled sample table for one condition.  x/y may be multi-column (vector
// state); dependence is then judged per column pair with a Bonferroni
// correction on the minimum p.
struct CITable {
  std::vector<std::vector<double>> x_cols, y_cols, z_cols;
  std::vector<int> strata;  // empty = no stratification
  std::vector<int> t_index;

  size_t n() const { return t_index.size(); }
};

inline CITable assemble_condition(const Dataset& ds, int condition) {
  CITable tab;
  const int ds_dim = ds.d_s, da_dim = ds.d_a;
  switch (condition) {
    case 1:
      tab.x_cols.resize(static_cast<size_t>(ds_dim));
      tab.y_cols.resize(static_cast<size_t>(da_dim));
      break;
    case 2:
      tab.x_cols.resize(1);
      tab.y_cols.resize(static_cast<size_t>(da_dim));
      break;
    case 3:
      // The conditioning basis carries cos/sin of every state dimension next
      // to the raw values.  Conditioning on fixed functions of (s_t, a_t) is
      // still conditioning on (s_t, a_t), and the linear backend needs the
      // expanded span when the true transition is trigonometric in the state
      // (unicycle kinematics); otherwise the leftover nonlinearity shows up
      // as spurious dependence on g_t.
      tab.x_cols.resize(1);
      tab.y_cols.resize(static_cast<size_t>(ds_dim));
      tab.z_cols.resize(static_cast<size_t>(3 * ds_dim + da_dim));
      break;
    default:
      throw std::invalid_argument("assemble_condition: condition must be 1, 2 or 3");
  }

  for (size_t i = 0; i < ds.trajs.size(); ++i) {
    const Trajectory& tr = ds.trajs[i];
    const int T = tr.length();
    const int t_max = condition == 1 ? T : T - 1;
    for (int t = 0; t < t_max; ++t) {
      switch (condition) {
        case 1:
          for (int d = 0; d < ds_dim; ++d) tab.x_cols[static_cast<size_t>(d)].push_back(tr.states(t, d));
          for (int d = 0; d < da_dim; ++d) tab.y_cols[static_cast<size_t>(d)].push_back(tr.actions(t, d));
          tab.strata.push_back(tr.labels[static_cast<size_t>(t)]);
          break;
        case 2:
          tab.x_cols[0].push_back(static_cast<double>(tr.labels[static_cast<size_t>(t)]));
          for (int d = 0; d < da_dim; ++d)
            tab.y_cols[static_cast<size_t>(d)].push_back(tr.actions(t + 1, d));
          tab.strata.push_back(tr.labels[static_cast<size_t>(t) + 1]);
          break;
        case 3:
          tab.x_cols[0].push_back(static_cast<double>(tr.labels[static_cast<size_t>(t)]));
          for (int d = 0; d < ds_dim; ++d)
            tab.y_cols[static_cast<size_t>(d)].push_back(tr.states(t + 1, d));
          for (int d = 0; d < ds_dim; ++d) {
            const double s = tr.states(t, d);
            tab.z_cols[static_cast<size_t>(d)].push_back(s);
            tab.z_cols[static_cast<size_t>(ds_dim + d)].push_back(std::cos(s));
            tab.z_cols[static_cast<size_t>(2 * ds_dim + d)].push_back(std::sin(s));
          }
          for (int d = 0; d < da_dim; ++d)
            tab.z_cols[static_cast<size_t>(3 * ds_dim + d)].push_back(tr.actions(t, d));
          break;
      }
      tab.t_index.push_back(t);
    }
  }
  return tab;
}

// One CI test on the rows in `idx`: minimum p over (x column, y column)
// pairs, Bonferroni-corrected by the number of pairs.  Returns false when no
// pair could be tested (all strata degenerate or sample too small).
inline bool run_subset_test(const CITable& tab, const std::vector<size_t>& idx, double* p_out) {
  const size_t pairs = tab.x_cols.size() * tab.y_cols.size();
  double best = 2.0;
  bool any = false;

  std::vector<int> g;
  if (!tab.strata.empty()) {
    g.reserve(idx.size());
    for (size_t i : idx) g.push_back(tab.strata[i]);
  }
  std::vector<std::vector<double>> z(tab.z_cols.size());
  for (size_t j = 0; j < tab.z_cols.size(); ++j) {
    z[j].reserve(idx.size());
    for (size_t i : idx) z[j].push_back(tab.z_cols[j][i]);
  }

  std::vector<double> x, y;
  for (const auto& xcol : tab.x_cols) {
    x.clear();
    for (size_t i : idx) x.push_back(xcol[i]);
    for (const auto& ycol : tab.y_cols) {
      y.clear();
      for (size_t i : idx) y.push_back(ycol[i]);
      try {
        const double p = tab.strata.empty() ? partial_corr_pvalue(x, y, z)
                                            : stratified_ci_pvalue(x, y, g, z);
        best = std::min(best, p);
        any = true;
      } catch (const std::invalid_argument&) {
        // stratum floor or degenerate design; pair skipped
      }
    }
  }
  if (!any) return false;
  *p_out = std::min(1.0, best * static_cast<double>(pairs));
  return true;
}

inline Verdict verdict_from_mean(double mean_p, const CITestConfig& cfg) {
  if (mean_p < cfg.alpha) return Verdict::dependent;
  if (mean_p > cfg.independence_floor) return Verdict::independent;
  return Verdict::inconclusive;
}

inline ConditionRecord summarize(int condition, Protocol proto, const std::vector<double>& ps,
                                 int skipped, const CITestConfig& cfg) {
  ConditionRecord rec;
  rec.condition = condition;
  rec.protocol = proto;
  rec.n_tests = static_cast<int>(ps.size());
  rec.n_skipped = skipped;
  if (ps.empty()) {
    rec.verdict = Verdict::inconclusive;
    return rec;
  }
  double m = 0.0;
  for (double p : ps) m += p;
  m /= static_cast<double>(ps.size());
  double v = 0.0;
  for (double p : ps) v += (p - m) * (p - m);
  v /= static_cast<double>(ps.size());
  rec.mean_p = m;
  rec.var_p = v;
  rec.verdict = verdict_from_mean(m, cfg);
  return rec;
}

}  // namespace detail

inline ConditionRecord test_condition(const Dataset& ds, int condition, Protocol proto,
                                      const CITestConfig& cfg = {}) {
  const detail::CITable tab = detail::assemble_condition(ds, condition);
  const int k = static_cast<int>(tab.z_cols.size());
  std::vector<double> ps;
  int skipped = 0;

  if (proto == Protocol::single_step) {
    int t_max = 0;
    for (int t : tab.t_index) t_max = std::max(t_max, t);
    const int survivor_floor =
        static_cast<int>(cfg.survivor_fraction * static_cast<double>(ds.trajs.size()));
    for (int t = 0; t <= t_max; ++t) {
      std::vector<size_t> idx;
      for (size_t i = 0; i < tab.n(); ++i)
        if (tab.t_index[i] == t) idx.push_back(i);
      if (static_cast<int>(idx.size()) < std::max({k + 4, cfg.min_single_n, survivor_floor})) {
        ++skipped;
        continue;
      }
      double p = 1.0;
      if (detail::run_subset_test(tab, idx, &p))
        ps.push_back(p);
      else
        ++skipped;
    }
  } else {
    Rng rng(cfg.seed * 1000003u + static_cast<uint64_t>(condition));
    const int n_pool = static_cast<int>(tab.n());
    const int m = std::max(k + 4, static_cast<int>(cfg.multi_fraction * n_pool));
    if (m > n_pool) throw std::invalid_argument("test_condition: pooled sample too small");
    for (int rep = 0; rep < cfg.multi_subsets; ++rep) {
      const std::vector<int> pick = rng.sample_without_replacement(n_pool, m);
      std::vector<size_t> idx(pick.begin(), pick.end());
      double p = 1.0;
      if (detail::run_subset_test(tab, idx, &p))
        ps.push_back(p);
      else
        ++skipped;
    }
  }
  return detail::summarize(condition, proto, ps, skipped, cfg);
}

inline ConditionRecord test_condition_1(const Dataset& ds, Protocol proto,
                                        const CITestConfig& cfg = {}) {
  return test_condition(ds, 1, proto, cfg);
}
inline ConditionRecord test_condition_2(const Dataset& ds, Protocol proto,
                                        const CITestConfig& cfg = {}) {
  return test_condition(ds, 2, proto, cfg);
}
inline ConditionRecord test_condition_3(const Dataset& ds, Protocol proto,
                                        const CITestConfig& cfg = {}) {
  return test_condition(ds, 3, proto, cfg);
}

// All three conditions under both protocols.  The selection verdict is read
// off the single-step records: (1) and (2) dependent, (3) independent.
inline CITestReport run_ci_suite(const Dataset& ds, const CITestConfig& cfg = {}) {
  CITestReport rep;
  rep.cfg = cfg;
  bool c1 = false, c2 = false, c3 = false;
  for (int cond = 1; cond <= 3; ++cond) {
    for (Protocol proto : {Protocol::single_step, Protocol::multi_step}) {
      ConditionRecord rec = test_condition(ds, cond, proto, cfg);
      if (proto == Protocol::single_step) {
        if (cond == 1) c1 = rec.verdict == Verdict::dependent;
        if (cond == 2) c2 = rec.verdict == Verdict::dependent;
        if (cond == 3) c3 = rec.verdict == Verdict::independent;
      }
      rep.records.push_back(rec);
    }
  }
  rep.selection_confirmed = c1 && c2 && c3;
  return rep;
}

// Diagnostic control: replaces every label sequence with i.i.d. draws over
// the dataset's label alphabet, severing the label from the dynamics.
inline Dataset randomize_labels(const Dataset& ds, uint64_t seed) {
  int max_label = 0;
  for (const auto& tr : ds.trajs)
    for (int l : tr.labels) max_label = std::max(max_label, l);
  Rng rng(seed);
  Dataset out = ds;
  out.generator = ds.generator + "-label-noise";
  for (auto& tr : out.trajs)
    for (auto& l : tr.labels) l = rng.uniform_int(max_label + 1);
  return out;
}

inline nlohmann::json to_json(const CITestReport& rep) {
  nlohmann::json j;
  j["records"] = nlohmann::json::array();
  for (const auto& rec : rep.records) {
    nlohmann::json r;
    r["condition"] = rec.condition;
    r["protocol"] = to_string(rec.protocol);
    r["mean_p"] = rec.mean_p;
    r["var_p"] = rec.var_p;
    r["verdict"] = to_string(rec.verdict);
    r["n_tests"] = rec.n_tests;
    r["n_skipped"] = rec.n_skipped;
    r["alpha"] = rep.cfg.alpha;
    r["seed"] = rep.cfg.seed;
    j["records"].push_back(r);
  }
  j["selection_confirmed"] = rep.selection_confirmed;
  j["alpha"] = rep.cfg.alpha;
  j["independence_floor"] = rep.cfg.independence_floor;
  j["seed"] = rep.cfg.seed;
  return j;
}

}  // namespace subdisc
