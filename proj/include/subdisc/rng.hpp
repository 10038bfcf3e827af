#pragma once
// Deterministic random source.  Uniform and normal draws are derived from
// raw mt19937_64 output with explicit bit manipulation, so streams are
// identical across compilers and standard libraries (std::*_distribution
// makes no such promise).

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace subdisc {

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t raw() { return gen_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double uniform_pos() { return 1.0 - uniform01(); }

  // Box-Muller; second value of each pair is cached.
  double normal(double mean = 0.0, double sd = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sd * spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return mean + sd * r * std::cos(a);
  }

  // Unbiased draw from {0, ..., n-1}.
  int uniform_int(int n) {
    if (n < 1) throw std::invalid_argument("uniform_int: n must be positive");
    const uint64_t un = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX / un * un;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<int>(x % un);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      const int k = uniform_int(i + 1);
      std::swap(v[i], v[static_cast<size_t>(k)]);
    }
  }

  // First k entries of a random permutation of {0, ..., n-1}.
  std::vector<int> sample_without_replacement(int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("sample_without_replacement: bad k");
    std::vector<int> idx(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + uniform_int(n - i);
      std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    idx.resize(static_cast<size_t>(k));
    return idx;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace subdisc
