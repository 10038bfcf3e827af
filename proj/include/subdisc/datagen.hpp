#pragma once
// Synthetic corpora with ground-truth subgoal labels: color-block pursuit
// sequences (3-step and 10-step patterns) and two-task driving
// demonstrations.  All generators are deterministic given their seed.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "subdisc/driving.hpp"
#include "subdisc/rng.hpp"
#include "subdisc/trajectory.hpp"

namespace subdisc {

enum class Color3Mode { simple, conditional };

// Color labels 0..3 = red, yellow, blue, purple; target state is label + 1.
inline double color_mean(int label) { return label + 1.0; }

namespace detail {

// Shared pursuit mechanics: a_t = g_t - s_t, s_{t+1} = s_t + a_t + noise.
// The first state starts at the first block's mean plus one noise draw.
inline Trajectory pursue_step_means(const std::vector<int>& step_labels,
                                    const std::vector<int>& boundaries, double noise_sd,
                                    int task_id, Rng& rng) {
  const int T = static_cast<int>(step_labels.size());
  Trajectory tr;
  tr.states = Matrix(T, 1);
  tr.actions = Matrix(T, 1);
  tr.labels = step_labels;
  tr.boundaries = boundaries;
  tr.task_id = task_id;

  double s = color_mean(step_labels[0]) + rng.normal(0.0, noise_sd);
  for (int t = 0; t < T; ++t) {
    const double g = color_mean(step_labels[static_cast<size_t>(t)]);
    const double a = g - s;
    tr.states(t, 0) = s;
    tr.actions(t, 0) = a;
    s = s + a + rng.normal(0.0, noise_sd);
  }
  return tr;
}

}  // namespace detail

inline Dataset gen_color3(Color3Mode mode, int n_seq, int T, double noise_sd, uint64_t seed) {
  if (T < 3 || T % 3 != 0) throw std::invalid_argument("gen_color3: T must be a positive multiple of 3");
  if (n_seq < 1) throw std::invalid_argument("gen_color3: n_seq must be positive");
  if (noise_sd < 0) throw std::invalid_argument("gen_color3: noise_sd must be nonnegative");

  Rng rng(seed);
  Dataset ds;
  ds.generator = mode == Color3Mode::simple ? "color3-simple" : "color3-conditional";
  ds.seed = seed;
  ds.d_s = 1;
  ds.d_a = 1;
  ds.params = {{"n_seq", double(n_seq)}, {"T", double(T)}, {"noise_sd", noise_sd}};

  const int n_blocks = T / 3;
  std::vector<int> boundaries;
  for (int b = 1; b < n_blocks; ++b) boundaries.push_back(3 * b);

  for (int i = 0; i < n_seq; ++i) {
    std::vector<int> block(static_cast<size_t>(n_blocks));
    for (auto& c : block) c = rng.uniform_int(3);
    if (mode == Color3Mode::conditional) {
      // Left-to-right re-coloring: a yellow block turns purple when the
      // block before it (as already re-colored) is yellow or blue.
      for (int b = 1; b < n_blocks; ++b) {
        const int prev = block[static_cast<size_t>(b) - 1];
        if (block[static_cast<size_t>(b)] == 1 && (prev == 1 || prev == 2))
          block[static_cast<size_t>(b)] = 3;
      }
    }
    std::vector<int> step_labels(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) step_labels[static_cast<size_t>(t)] = block[static_cast<size_t>(t / 3)];
    ds.trajs.push_back(detail::pursue_step_means(step_labels, boundaries, noise_sd, 0, rng));
  }
  validate_dataset(ds);
  return ds;
}

inline const std::vector<int>& color10_template(int which) {
  static const std::vector<int> a = {0, 0, 0, 1, 1, 1, 2, 2, 2, 2};
  static const std::vector<int> b = {2, 2, 2, 1, 1, 1, 0, 0, 0, 0};
  return which == 0 ? a : b;
}

inline Dataset gen_color10(int n_seq, int T, double noise_sd, uint64_t seed) {
  if (T < 10 || T % 10 != 0)
    throw std::invalid_argument("gen_color10: T must be a positive multiple of 10");
  if (n_seq < 1) throw std::invalid_argument("gen_color10: n_seq must be positive");
  if (noise_sd < 0) throw std::invalid_argument("gen_color10: noise_sd must be nonnegative");

  Rng rng(seed);
  Dataset ds;
  ds.generator = "color10";
  ds.seed = seed;
  ds.d_s = 1;
  ds.d_a = 1;
  ds.params = {{"n_seq", double(n_seq)}, {"T", double(T)}, {"noise_sd", noise_sd}};

  const int n_blocks = T / 10;
  std::vector<int> boundaries;
  for (int b = 1; b < n_blocks; ++b) boundaries.push_back(10 * b);

  for (int i = 0; i < n_seq; ++i) {
    std::vector<int> step_labels(static_cast<size_t>(T));
    for (int b = 0; b < n_blocks; ++b) {
      const auto& tmpl = color10_template(rng.uniform_int(2));
      for (int u = 0; u < 10; ++u) step_labels[static_cast<size_t>(10 * b + u)] = tmpl[static_cast<size_t>(u)];
    }
    ds.trajs.push_back(detail::pursue_step_means(step_labels, boundaries, noise_sd, 0, rng));
  }
  validate_dataset(ds);
  return ds;
}

struct DrivingConfig {
  DrivingCourse course;
  double noise_sd = 0.02;         // heading noise added to the tracker output
  double start_x_jitter = 2.0;    // start drawn uniformly from [0, start_x_jitter]
  double path_scale_jitter = 0.15;  // per-trajectory path amplitude in [1-j, 1+j]
  double lookahead_jitter = 0.25;   // per-trajectory lookahead in [1-j, 1+j] * lookahead
  double start_y_jitter = 1.0;    // initial lateral offset spread
  double start_theta_jitter = 0.05;
  double lookahead = 3.0;
  double max_turn = 0.3;
  int max_steps = 200;
};

inline Dataset gen_driving(int n_per_task, uint64_t seed, const DrivingConfig& cfg = {}) {
  if (n_per_task < 1) throw std::invalid_argument("gen_driving: n_per_task must be positive");

  Rng rng(seed);
  Dataset ds;
  ds.generator = "driving";
  ds.seed = seed;
  ds.d_s = 3;
  ds.d_a = 1;
  ds.params = {{"n_per_task", double(n_per_task)},
               {"noise_sd", cfg.noise_sd},
               {"start_x_jitter", cfg.start_x_jitter},
               {"path_scale_jitter", cfg.path_scale_jitter},
               {"lookahead_jitter", cfg.lookahead_jitter},
               {"width", cfg.course.width},
               {"amp0", cfg.course.amp0},
               {"amp1", cfg.course.amp1},
               {"bump", cfg.course.bump},
               {"tilt", cfg.course.tilt}};

  for (int task = 0; task < 2; ++task) {
    for (int i = 0; i < n_per_task; ++i) {
      CarState s;
      // Two persistent per-driver traits: the path amplitude each one cuts
      // (scaling keeps the reference path's zero crossings, so phase labels
      // stay exact) and the lookahead each one steers by.  The lookahead
      // low-passes the path, so its trace in the demonstration couples the
      // lateral state to the action with the same sign for both tasks, which
      // keeps the pooled per-step statistics away from cross-task
      // cancellation.
      const double scale =
          1.0 + cfg.path_scale_jitter * (2.0 * rng.uniform01() - 1.0);
      const double look =
          cfg.lookahead * (1.0 + cfg.lookahead_jitter * (2.0 * rng.uniform01() - 1.0));
      s.x = rng.uniform01() * cfg.start_x_jitter;
      s.y = scale * cfg.course.y_ref(task, s.x) + rng.normal(0.0, cfg.start_y_jitter);
      s.theta = std::atan(scale * cfg.course.slope(task, s.x)) +
                rng.normal(0.0, cfg.start_theta_jitter);

      PurePursuitTracker tracker(cfg.course, task, look, cfg.max_turn, scale);
      std::vector<CarState> states;
      std::vector<double> actions;
      while (s.x < cfg.course.width && static_cast<int>(states.size()) < cfg.max_steps) {
        const double a = tracker.steer(s) + rng.normal(0.0, cfg.noise_sd);
        states.push_back(s);
        actions.push_back(a);
        s = drive_step(s, a);
      }

      const int T = static_cast<int>(states.size());
      Trajectory tr;
      tr.task_id = task;
      tr.states = Matrix(T, 3);
      tr.actions = Matrix(T, 1);
      tr.labels.assign(static_cast<size_t>(T), 0);
      for (int t = 0; t < T; ++t) {
        tr.states(t, 0) = states[static_cast<size_t>(t)].x;
        tr.states(t, 1) = states[static_cast<size_t>(t)].y;
        tr.states(t, 2) = states[static_cast<size_t>(t)].theta;
        tr.actions(t, 0) = actions[static_cast<size_t>(t)];
        tr.labels[static_cast<size_t>(t)] = cfg.course.phase_label(states[static_cast<size_t>(t)].x);
      }
      for (int t = 1; t < T; ++t)
        if (tr.labels[static_cast<size_t>(t)] != tr.labels[static_cast<size_t>(t) - 1])
          tr.boundaries.push_back(t);
      ds.trajs.push_back(std::move(tr));
    }
  }
  validate_dataset(ds);
  return ds;
}

}  // namespace subdisc
