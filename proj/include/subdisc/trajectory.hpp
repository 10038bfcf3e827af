#pragma once
// Trajectory containers, dataset (de)serialization, and the assembly of the
// factorization input: trajectories concatenated column-wise with a zero
// separator column between them, every row min-max scaled to [0,1].

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "subdisc/matrix.hpp"

namespace subdisc {

struct Trajectory {
  Matrix states;                // T x d_s
  Matrix actions;               // T x d_a
  std::vector<int> labels;      // ground-truth subgoal label per step
  std::vector<int> boundaries;  // strictly increasing, each in [1, T)
  int task_id = 0;

  int length() const { return states.rows; }
};

struct Dataset {
  std::string generator;
  uint64_t seed = 0;
  int d_s = 0, d_a = 0;
  std::map<std::string, double> params;
  std::vector<Trajectory> trajs;
};

inline void validate_dataset(const Dataset& ds) {
  if (ds.trajs.empty()) throw std::invalid_argument("dataset: no trajectories");
  for (size_t i = 0; i < ds.trajs.size(); ++i) {
    const Trajectory& tr = ds.trajs[i];
    const int T = tr.length();
    if (tr.actions.rows != T || static_cast<int>(tr.labels.size()) != T)
      throw std::invalid_argument("dataset: per-step arrays disagree in length");
    if (tr.states.cols != ds.d_s || tr.actions.cols != ds.d_a)
      throw std::invalid_argument("dataset: trajectory dimensions disagree with dataset");
    if (!is_finite(tr.states) || !is_finite(tr.actions))
      throw std::invalid_argument("dataset: non-finite entries");
    // Boundaries mark subtask edges; labels may change inside a subtask
    // (10-step color windows carry three colors), so only ordering is
    // checked here.
    int prev = 0;
    for (int b : tr.boundaries) {
      if (b <= prev || b < 1 || b >= T) throw std::invalid_argument("dataset: bad boundary");
      prev = b;
    }
  }
}

struct NormalizationInfo {
  std::vector<double> row_min, row_max;  // size d_s + d_a
  int d_s = 0, d_a = 0;

  int dim() const { return d_s + d_a; }

  double scale_value(int row, double x) const {
    const double range = row_max[static_cast<size_t>(row)] - row_min[static_cast<size_t>(row)];
    if (range <= 0.0) return 0.0;
    return (x - row_min[static_cast<size_t>(row)]) / range;
  }

  double unscale_value(int row, double x) const {
    const double range = row_max[static_cast<size_t>(row)] - row_min[static_cast<size_t>(row)];
    return row_min[static_cast<size_t>(row)] + x * range;
  }

  // State rows occupy [0, d_s), action rows [d_s, d_s + d_a).
  std::vector<double> scale_state(const std::vector<double>& s) const {
    std::vector<double> out(s.size());
    for (size_t i = 0; i < s.size(); ++i) out[i] = scale_value(static_cast<int>(i), s[i]);
    return out;
  }

  double unscale_action(int action_row, double x) const { return unscale_value(d_s + action_row, x); }
};

struct DataMatrix {
  Matrix X;                        // (d_s + d_a) x T_total, entries in [0,1]
  NormalizationInfo norm;
  std::vector<int> col_traj;       // trajectory index per column, -1 for separators
  std::vector<int> col_step;       // step index per column, -1 for separators
  std::vector<uint8_t> data_mask;  // 1 for real data columns, 0 for separators
};

inline DataMatrix build_data_matrix(const Dataset& ds) {
  validate_dataset(ds);
  const int D = ds.d_s + ds.d_a;
  size_t total = ds.trajs.size() - 1;  // separators
  for (const auto& tr : ds.trajs) total += static_cast<size_t>(tr.length());

  DataMatrix dm;
  dm.X = Matrix(D, static_cast<int>(total), 0.0);
  dm.col_traj.assign(total, -1);
  dm.col_step.assign(total, -1);
  dm.data_mask.assign(total, 0);

  int c = 0;
  for (size_t i = 0; i < ds.trajs.size(); ++i) {
    if (i) ++c;  // leave one zero separator column
    const Trajectory& tr = ds.trajs[i];
    for (int t = 0; t < tr.length(); ++t, ++c) {
      for (int d = 0; d < ds.d_s; ++d) dm.X(d, c) = tr.states(t, d);
      for (int d = 0; d < ds.d_a; ++d) dm.X(ds.d_s + d, c) = tr.actions(t, d);
      dm.col_traj[static_cast<size_t>(c)] = static_cast<int>(i);
      dm.col_step[static_cast<size_t>(c)] = t;
      dm.data_mask[static_cast<size_t>(c)] = 1;
    }
  }

  // Min-max per row over data columns only; separators stay exactly zero so
  // no pattern window can straddle two trajectories profitably.
  dm.norm.d_s = ds.d_s;
  dm.norm.d_a = ds.d_a;
  dm.norm.row_min.assign(static_cast<size_t>(D), 0.0);
  dm.norm.row_max.assign(static_cast<size_t>(D), 0.0);
  for (int d = 0; d < D; ++d) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (int t = 0; t < dm.X.cols; ++t) {
      if (!dm.data_mask[static_cast<size_t>(t)]) continue;
      const double x = dm.X(d, t);
      if (first) {
        lo = hi = x;
        first = false;
      } else {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
    dm.norm.row_min[static_cast<size_t>(d)] = lo;
    dm.norm.row_max[static_cast<size_t>(d)] = hi;
    for (int t = 0; t < dm.X.cols; ++t)
      if (dm.data_mask[static_cast<size_t>(t)]) dm.X(d, t) = dm.norm.scale_value(d, dm.X(d, t));
  }
  return dm;
}

// ---- dataset directory serialization ----

inline std::string traj_file_name(size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "traj_%04zu.csv", i);
  return std::string(buf);
}

inline void save_dataset(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  nlohmann::json man;
  man["generator"] = ds.generator;
  man["seed"] = ds.seed;
  man["d_s"] = ds.d_s;
  man["d_a"] = ds.d_a;
  man["n_trajectories"] = ds.trajs.size();
  man["parameters"] = nlohmann::json::object();
  for (const auto& [k, v] : ds.params) man["parameters"][k] = v;
  man["trajectories"] = nlohmann::json::array();
  for (size_t i = 0; i < ds.trajs.size(); ++i) {
    const Trajectory& tr = ds.trajs[i];
    nlohmann::json jt;
    jt["file"] = traj_file_name(i);
    jt["length"] = tr.length();
    jt["task_id"] = tr.task_id;
    jt["boundaries"] = tr.boundaries;
    man["trajectories"].push_back(jt);
  }
  write_text_file((fs::path(dir) / "manifest.json").string(), man.dump(2) + "\n");

  for (size_t i = 0; i < ds.trajs.size(); ++i) {
    const Trajectory& tr = ds.trajs[i];
    std::ostringstream out;
    for (int t = 0; t < tr.length(); ++t) {
      out << t;
      for (int d = 0; d < tr.states.cols; ++d) out << ',' << fmt_double(tr.states(t, d));
      for (int d = 0; d < tr.actions.cols; ++d) out << ',' << fmt_double(tr.actions(t, d));
      out << ',' << tr.labels[static_cast<size_t>(t)] << ',' << tr.task_id << '\n';
    }
    write_text_file((fs::path(dir) / traj_file_name(i)).string(), out.str());
  }
}

inline Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  const nlohmann::json man =
      nlohmann::json::parse(read_text_file((fs::path(dir) / "manifest.json").string()));

  Dataset ds;
  ds.generator = man.at("generator").get<std::string>();
  ds.seed = man.at("seed").get<uint64_t>();
  ds.d_s = man.at("d_s").get<int>();
  ds.d_a = man.at("d_a").get<int>();
  if (man.contains("parameters"))
    for (auto it = man["parameters"].begin(); it != man["parameters"].end(); ++it)
      ds.params[it.key()] = it.value().get<double>();

  for (const auto& jt : man.at("trajectories")) {
    Trajectory tr;
    const int T = jt.at("length").get<int>();
    tr.task_id = jt.at("task_id").get<int>();
    tr.boundaries = jt.at("boundaries").get<std::vector<int>>();
    tr.states = Matrix(T, ds.d_s);
    tr.actions = Matrix(T, ds.d_a);
    tr.labels.assign(static_cast<size_t>(T), 0);

    const std::string body =
        read_text_file((fs::path(dir) / jt.at("file").get<std::string>()).string());
    std::istringstream in(body);
    std::string line;
    int t = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line == "\r") continue;
      if (t >= T) throw std::runtime_error("load_dataset: extra rows in " + dir);
      const auto cells = split_csv_line(line);
      if (static_cast<int>(cells.size()) != 1 + ds.d_s + ds.d_a + 2)
        throw std::runtime_error("load_dataset: bad column count");
      int c = 1;
      for (int d = 0; d < ds.d_s; ++d) tr.states(t, d) = parse_double(cells[static_cast<size_t>(c++)]);
      for (int d = 0; d < ds.d_a; ++d) tr.actions(t, d) = parse_double(cells[static_cast<size_t>(c++)]);
      tr.labels[static_cast<size_t>(t)] = static_cast<int>(parse_long(cells[static_cast<size_t>(c++)]));
      ++t;
    }
    if (t != T) throw std::runtime_error("load_dataset: truncated trajectory file");
    ds.trajs.push_back(std::move(tr));
  }
  validate_dataset(ds);
  return ds;
}

}  // namespace subdisc
