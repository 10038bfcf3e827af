#pragma once
// Driving environment: unicycle kinematics at unit speed on a course with
// two skewed sine-arc reference paths that cross at one third and two thirds
// of the course width.  Shared by the demonstration generator and pattern
// playback.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace subdisc {

inline double wrap_angle(double a) {
  const double two_pi = 6.283185307179586476925286766559;
  a = std::fmod(a + 3.141592653589793238462643383280, two_pi);
  if (a < 0) a += two_pi;
  return a - 3.141592653589793238462643383280;
}

struct CarState {
  double x = 0.0, y = 0.0, theta = 0.0;
};

// x += cos(theta), y += sin(theta), theta += dtheta, in that order.
inline CarState drive_step(const CarState& s, double dtheta) {
  CarState n;
  n.x = s.x + std::cos(s.theta);
  n.y = s.y + std::sin(s.theta);
  n.theta = s.theta + dtheta;
  return n;
}

struct DrivingCourse {
  double width = 100.0;
  // Task 0 arcs upward first, task 1 arcs downward with a smaller amplitude.
  // Unequal amplitudes keep the pooled two-task statistics away from the
  // exact cancellation a perfect mirror pair would produce.
  double amp0 = 7.0;
  double amp1 = 5.5;
  // Both paths follow
  //   signed_amp * sin(kx) + bump * (1 - cos(4kx)) + tilt * sin(2kx).
  // The bump and tilt terms are common to the two tasks, so they cancel from
  // the difference y0 - y1 and the paths still cross exactly at W/3 and 2W/3
  // (the interior zeros of sin(kx)); both vanish at the course ends.  At the
  // crossings the per-task sine is flat, so the steering there is common
  // mode: the bump contributes the same 16*bump*k^2 curvature to every
  // trajectory, and the tilt's curvature is antisymmetric around each
  // crossing with the same orientation at both, flipping everyone's steering
  // as a boundary is crossed.  Pooling the two tasks cannot cancel either
  // signature.
  double bump = 1.5;
  double tilt = 2.0;

  double wave_number() const { return 3.0 * 3.141592653589793238462643383280 / width; }
  double crossing1() const { return width / 3.0; }
  double crossing2() const { return 2.0 * width / 3.0; }

  double signed_amp(int task) const { return task == 0 ? amp0 : -amp1; }

  // Both reference paths share zeros at 0, W/3, 2W/3 and W; past the right
  // edge they continue straight along the end tangent.
  double y_ref(int task, double x) const {
    const double a = signed_amp(task);
    if (x <= width) {
      const double u = wave_number() * x;
      return a * std::sin(u) + bump * (1.0 - std::cos(4.0 * u)) + tilt * std::sin(2.0 * u);
    }
    return slope(task, width) * (x - width);
  }

  double slope(int task, double x) const {
    const double a = signed_amp(task);
    const double k = wave_number();
    const double u = k * std::min(x, width);
    return a * k * std::cos(u) + 4.0 * bump * k * std::sin(4.0 * u) +
           2.0 * tilt * k * std::cos(2.0 * u);
  }

  int phase_label(double x) const {
    if (x < crossing1()) return 0;
    if (x < crossing2()) return 1;
    return 2;
  }
};

// Reference-path follower: steers toward the point one lookahead arc length
// ahead of the nearest path sample.  The path is sampled once up front; the
// cursor only moves forward, which is valid because x is monotone under the
// course's bounded headings.
class PurePursuitTracker {
 public:
  // path_scale multiplies the reference path's y profile; scaling preserves
  // the path's zeros, so a scaled path still crosses the axis at the same
  // course positions.
  PurePursuitTracker(const DrivingCourse& course, int task, double lookahead = 3.0,
                     double max_turn = 0.3, double path_scale = 1.0)
      : lookahead_(lookahead), max_turn_(max_turn) {
    const int n = 4001;
    const double x_end = course.width + 2.0 * lookahead + 2.0;
    xs_.resize(n);
    ys_.resize(n);
    cum_.resize(n);
    for (int i = 0; i < n; ++i) {
      const double x = x_end * i / (n - 1);
      xs_[static_cast<size_t>(i)] = x;
      ys_[static_cast<size_t>(i)] = path_scale * course.y_ref(task, x);
    }
    cum_[0] = 0.0;
    for (int i = 1; i < n; ++i)
      cum_[static_cast<size_t>(i)] =
          cum_[static_cast<size_t>(i) - 1] +
          std::hypot(xs_[static_cast<size_t>(i)] - xs_[static_cast<size_t>(i) - 1],
                     ys_[static_cast<size_t>(i)] - ys_[static_cast<size_t>(i) - 1]);
  }

  double steer(const CarState& s) {
    const int n = static_cast<int>(xs_.size());
    const int win_end = std::min(n - 1, cursor_ + 160);
    double best = dist2(cursor_, s);
    int best_i = cursor_;
    for (int i = cursor_ + 1; i <= win_end; ++i) {
      const double d = dist2(i, s);
      if (d < best) {
        best = d;
        best_i = i;
      }
    }
    cursor_ = best_i;

    int target = cursor_;
    while (target + 1 < n &&
           cum_[static_cast<size_t>(target)] - cum_[static_cast<size_t>(cursor_)] < lookahead_)
      ++target;

    const double desired =
        std::atan2(ys_[static_cast<size_t>(target)] - s.y, xs_[static_cast<size_t>(target)] - s.x);
    return std::clamp(wrap_angle(desired - s.theta), -max_turn_, max_turn_);
  }

 private:
  double dist2(int i, const CarState& s) const {
    const double dx = xs_[static_cast<size_t>(i)] - s.x;
    const double dy = ys_[static_cast<size_t>(i)] - s.y;
    return dx * dx + dy * dy;
  }

  double lookahead_;
  double max_turn_;
  int cursor_ = 0;
  std::vector<double> xs_, ys_, cum_;
};

}  // namespace subdisc
