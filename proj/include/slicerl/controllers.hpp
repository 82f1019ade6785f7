#pragma once

#include <cstdint>

#include "slicerl/core.hpp"
#include "slicerl/ppo.hpp"
#include "slicerl/rng.hpp"

namespace slicerl {

// Maps an observation, plus the previous step's measured usage and applied
// allocation, to a normalized action in [0,1].
class ControllerInterface {
 public:
  virtual ~ControllerInterface() = default;
  virtual NormalizedAction act(const Observation& obs, double last_usage_mc,
                               double last_alloc_mc) = 0;
};

// Fixed allocation regardless of the observation stream.
class StaticController final : public ControllerInterface {
 public:
  StaticController(double fixed_mc, const SliceConfig& cfg);
  NormalizedAction act(const Observation& obs, double last_usage_mc,
                       double last_alloc_mc) override;

 private:
  double action_;
};

// Reactive autoscaling: step the allocation up when utilization exceeds
// theta_hi, down when it falls below theta_lo, otherwise hold.
class ThresholdController final : public ControllerInterface {
 public:
  ThresholdController(double theta_hi, double theta_lo, double step_mc,
                      const SliceConfig& cfg);
  NormalizedAction act(const Observation& obs, double last_usage_mc,
                       double last_alloc_mc) override;

 private:
  double theta_hi_;
  double theta_lo_;
  double step_mc_;
  SliceConfig cfg_;
};

// Tracks estimated demand scaled by a headroom factor >= 1.
class ProportionalController final : public ControllerInterface {
 public:
  ProportionalController(double headroom, const SliceConfig& cfg);
  NormalizedAction act(const Observation& obs, double last_usage_mc,
                       double last_alloc_mc) override;

 private:
  double headroom_;
  SliceConfig cfg_;
};

// Learned policy; deterministic mode returns the clamped mean, otherwise
// actions are sampled from the policy's Gaussian.
class RlController final : public ControllerInterface {
 public:
  RlController(PolicyParameters params, bool deterministic, uint64_t seed);
  NormalizedAction act(const Observation& obs, double last_usage_mc,
                       double last_alloc_mc) override;

 private:
  PolicyParameters params_;
  bool deterministic_;
  Rng rng_;
};

}  // namespace slicerl
