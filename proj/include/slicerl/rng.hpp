#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace slicerl {

// splitmix64 mix; derives independent child seeds from a base seed so that
// multi-run experiments (sweeps, calibration, training sub-streams) never
// share a generator state.
inline uint64_t split_seed(uint64_t base, uint64_t stream) {
  uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seedable generator. Uniform and normal variates are derived from the raw
// 64-bit engine output explicitly (bit shift and polar method) instead of
// std::*_distribution, whose sequences differ across standard libraries;
// this keeps traces byte-reproducible for a given seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via the polar method; the second variate of each
  // accepted pair is cached for the next call
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double v1 = 0.0;
    double v2 = 0.0;
    double w = 0.0;
    do {
      v1 = 2.0 * uniform01() - 1.0;
      v2 = 2.0 * uniform01() - 1.0;
      w = v1 * v1 + v2 * v2;
    } while (w >= 1.0 || w == 0.0);
    const double y = std::sqrt(-2.0 * std::log(w) / w);
    spare_ = v2 * y;
    has_spare_ = true;
    return v1 * y;
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace slicerl
