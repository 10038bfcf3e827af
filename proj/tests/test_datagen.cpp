#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "subdisc/datagen.hpp"

using namespace subdisc;

TEST_CASE("color3 defaults produce the right corpus shape") {
  Dataset ds = gen_color3(Color3Mode::simple, 100, 300, 0.1, 7);
  REQUIRE(ds.trajs.size() == 100);
  REQUIRE(ds.d_s == 1);
  REQUIRE(ds.d_a == 1);
  for (const auto& tr : ds.trajs) {
    REQUIRE(tr.length() == 300);
    REQUIRE(tr.boundaries.size() == 99);
    for (size_t b = 0; b < tr.boundaries.size(); ++b)
      REQUIRE(tr.boundaries[b] == static_cast<int>(3 * (b + 1)));
  }
}

TEST_CASE("color3 noiseless states reach each block mean after one step") {
  Dataset ds = gen_color3(Color3Mode::simple, 5, 30, 0.0, 3);
  for (const auto& tr : ds.trajs) {
    CHECK(tr.states(0, 0) == color_mean(tr.labels[0]));
    for (int t = 1; t < tr.length(); ++t) {
      // One-step pursuit: the state equals the goal it chased last step, so
      // within a block every step from the second onward sits on the mean.
      CHECK(tr.states(t, 0) == color_mean(tr.labels[static_cast<size_t>(t) - 1]));
      if (t % 3 != 0) CHECK(tr.states(t, 0) == color_mean(tr.labels[static_cast<size_t>(t)]));
    }
  }
}

TEST_CASE("color3 modes use the expected label alphabets") {
  Dataset simple = gen_color3(Color3Mode::simple, 30, 300, 0.1, 11);
  std::set<int> seen;
  for (const auto& tr : simple.trajs) seen.insert(tr.labels.begin(), tr.labels.end());
  CHECK(seen == std::set<int>{0, 1, 2});

  Dataset cond = gen_color3(Color3Mode::conditional, 30, 300, 0.1, 11);
  seen.clear();
  for (const auto& tr : cond.trajs) seen.insert(tr.labels.begin(), tr.labels.end());
  CHECK(seen == std::set<int>{0, 1, 2, 3});
}

TEST_CASE("color3 conditional: yellow only ever follows red or purple") {
  Dataset ds = gen_color3(Color3Mode::conditional, 50, 300, 0.1, 23);
  for (const auto& tr : ds.trajs) {
    for (int b = 1; b < 100; ++b) {
      const int cur = tr.labels[static_cast<size_t>(3 * b)];
      const int prev = tr.labels[static_cast<size_t>(3 * (b - 1))];
      if (cur == 1) {
        const bool ok = prev == 0 || prev == 3;
        CHECK(ok);
      }
    }
  }
}

TEST_CASE("color3 action is the gap to the block mean") {
  Dataset ds = gen_color3(Color3Mode::simple, 3, 60, 0.1, 5);
  for (const auto& tr : ds.trajs)
    for (int t = 0; t < tr.length(); ++t) {
      const double g = color_mean(tr.labels[static_cast<size_t>(t)]);
      CHECK(tr.actions(t, 0) == Catch::Approx(g - tr.states(t, 0)).margin(1e-12));
    }
}

TEST_CASE("generators are bitwise deterministic given the seed") {
  Dataset a = gen_color3(Color3Mode::conditional, 4, 30, 0.1, 99);
  Dataset b = gen_color3(Color3Mode::conditional, 4, 30, 0.1, 99);
  REQUIRE(a.trajs.size() == b.trajs.size());
  for (size_t i = 0; i < a.trajs.size(); ++i) {
    CHECK(a.trajs[i].states.v == b.trajs[i].states.v);
    CHECK(a.trajs[i].actions.v == b.trajs[i].actions.v);
    CHECK(a.trajs[i].labels == b.trajs[i].labels);
  }
  Dataset c = gen_driving(3, 4242);
  Dataset d = gen_driving(3, 4242);
  for (size_t i = 0; i < c.trajs.size(); ++i) {
    CHECK(c.trajs[i].states.v == d.trajs[i].states.v);
    CHECK(c.trajs[i].actions.v == d.trajs[i].actions.v);
  }
}

TEST_CASE("color10 noiseless tiles the two mean templates") {
  Dataset ds = gen_color10(4, 100, 0.0, 17);
  for (const auto& tr : ds.trajs) {
    for (int b = 0; b < 10; ++b) {
      // Identify the template from the first step's label, then demand an
      // exact label match over the whole window.
      const int first = tr.labels[static_cast<size_t>(10 * b)];
      const auto& tmpl = color10_template(first == 0 ? 0 : 1);
      for (int u = 0; u < 10; ++u)
        CHECK(tr.labels[static_cast<size_t>(10 * b + u)] == tmpl[static_cast<size_t>(u)]);
    }
    // States are the goal tiling delayed by the one-step pursuit lag.
    CHECK(tr.states(0, 0) == color_mean(tr.labels[0]));
    for (int t = 1; t < tr.length(); ++t)
      CHECK(tr.states(t, 0) == color_mean(tr.labels[static_cast<size_t>(t) - 1]));
  }
}

TEST_CASE("color10 boundaries sit at multiples of 10") {
  Dataset ds = gen_color10(10, 300, 0.1, 21);
  for (const auto& tr : ds.trajs) {
    REQUIRE(tr.boundaries.size() == 29);
    for (size_t b = 0; b < tr.boundaries.size(); ++b)
      CHECK(tr.boundaries[b] == static_cast<int>(10 * (b + 1)));
  }
}

TEST_CASE("driving corpus shape, lengths, and boundaries") {
  Dataset ds = gen_driving(50, 31);
  REQUIRE(ds.trajs.size() == 100);
  REQUIRE(ds.d_s == 3);
  REQUIRE(ds.d_a == 1);
  double mean_len = 0.0;
  int task0 = 0;
  for (const auto& tr : ds.trajs) {
    CHECK(tr.length() >= 90);
    CHECK(tr.length() <= 130);
    mean_len += tr.length();
    REQUIRE(tr.boundaries.size() == 2);
    task0 += tr.task_id == 0 ? 1 : 0;
    std::set<int> labels(tr.labels.begin(), tr.labels.end());
    CHECK(labels == std::set<int>{0, 1, 2});
  }
  mean_len /= static_cast<double>(ds.trajs.size());
  CHECK(mean_len > 100.0);
  CHECK(mean_len < 122.0);
  CHECK(task0 == 50);
}

TEST_CASE("driving transitions satisfy the kinematics exactly") {
  Dataset ds = gen_driving(3, 8);
  for (const auto& tr : ds.trajs)
    for (int t = 0; t + 1 < tr.length(); ++t) {
      CHECK(tr.states(t + 1, 0) == tr.states(t, 0) + std::cos(tr.states(t, 2)));
      CHECK(tr.states(t + 1, 1) == tr.states(t, 1) + std::sin(tr.states(t, 2)));
      CHECK(tr.states(t + 1, 2) == tr.states(t, 2) + tr.actions(t, 0));
    }
}

TEST_CASE("driving labels track the crossing thresholds") {
  DrivingConfig cfg;
  Dataset ds = gen_driving(5, 12, cfg);
  for (const auto& tr : ds.trajs)
    for (int t = 0; t < tr.length(); ++t) {
      const double x = tr.states(t, 0);
      CHECK(tr.labels[static_cast<size_t>(t)] == cfg.course.phase_label(x));
    }
}

TEST_CASE("data matrix layout, scaling, and inversion") {
  Dataset ds = gen_color3(Color3Mode::simple, 4, 30, 0.1, 2);
  DataMatrix dm = build_data_matrix(ds);

  REQUIRE(dm.X.rows == 2);
  REQUIRE(dm.X.cols == 4 * 30 + 3);

  for (double x : dm.X.v) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }

  int separators = 0;
  for (int c = 0; c < dm.X.cols; ++c) {
    if (!dm.data_mask[static_cast<size_t>(c)]) {
      ++separators;
      CHECK(dm.col_traj[static_cast<size_t>(c)] == -1);
      for (int d = 0; d < dm.X.rows; ++d) CHECK(dm.X(d, c) == 0.0);
    }
  }
  CHECK(separators == 3);

  // Inversion against the source trajectories.
  for (int c = 0; c < dm.X.cols; ++c) {
    if (!dm.data_mask[static_cast<size_t>(c)]) continue;
    const auto& tr = ds.trajs[static_cast<size_t>(dm.col_traj[static_cast<size_t>(c)])];
    const int t = dm.col_step[static_cast<size_t>(c)];
    const double s = dm.norm.unscale_value(0, dm.X(0, c));
    const double a = dm.norm.unscale_value(1, dm.X(1, c));
    CHECK(s == Catch::Approx(tr.states(t, 0)).epsilon(1e-12));
    CHECK(a == Catch::Approx(tr.actions(t, 0)).epsilon(1e-12));
  }
}

TEST_CASE("degenerate one-step dataset scales to a single zero column") {
  Dataset ds;
  ds.generator = "unit";
  ds.d_s = 1;
  ds.d_a = 1;
  Trajectory tr;
  tr.states = Matrix(1, 1, 4.2);
  tr.actions = Matrix(1, 1, -1.0);
  tr.labels = {0};
  tr.task_id = 0;
  ds.trajs.push_back(tr);

  DataMatrix dm = build_data_matrix(ds);
  REQUIRE(dm.X.cols == 1);
  CHECK(dm.X(0, 0) == 0.0);
  CHECK(dm.X(1, 0) == 0.0);
  CHECK(dm.norm.unscale_value(0, dm.X(0, 0)) == 4.2);
}

TEST_CASE("dataset directory round trip preserves everything") {
  Dataset ds = gen_driving(2, 55);
  const std::string dir = "datagen_roundtrip_tmp";
  save_dataset(ds, dir);
  Dataset back = load_dataset(dir);

  REQUIRE(back.trajs.size() == ds.trajs.size());
  CHECK(back.generator == ds.generator);
  CHECK(back.seed == ds.seed);
  CHECK(back.d_s == ds.d_s);
  CHECK(back.d_a == ds.d_a);
  for (size_t i = 0; i < ds.trajs.size(); ++i) {
    CHECK(back.trajs[i].states.v == ds.trajs[i].states.v);
    CHECK(back.trajs[i].actions.v == ds.trajs[i].actions.v);
    CHECK(back.trajs[i].labels == ds.trajs[i].labels);
    CHECK(back.trajs[i].boundaries == ds.trajs[i].boundaries);
    CHECK(back.trajs[i].task_id == ds.trajs[i].task_id);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("generator input validation") {
  CHECK_THROWS_AS(gen_color3(Color3Mode::simple, 1, 301, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_color10(1, 305, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_driving(0, 1), std::invalid_argument);
  Dataset empty;
  empty.d_s = 1;
  empty.d_a = 1;
  CHECK_THROWS_AS(build_data_matrix(empty), std::invalid_argument);
}
