#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <utility>

#include "slicerl/core.hpp"
#include "slicerl/rng.hpp"

namespace slicerl {

// Raised when no calibration grid point reaches the target tolerance.
class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& msg, double best_beta)
      : std::runtime_error(msg), best_beta_(best_beta) {}
  double best_beta() const { return best_beta_; }

 private:
  double best_beta_;
};

struct EnvState {
  long step = 0;
  int active_users = 0;
  double demand_mc = 0.0;
  double allocation_mc = 0.0;
  double cpu_usage_mc = 0.0;
  double throughput_mbps = 0.0;
};

// Control surface of the slice environment. apply_cpu_limit takes effect in
// the following step (limit applied, then traffic served); a live backend
// over OS CPU-limit controls could implement the same interface.
class EnvInterface {
 public:
  virtual ~EnvInterface() = default;
  virtual Observation reset(uint64_t seed) = 0;
  virtual void apply_cpu_limit(double mc) = 0;
  virtual std::pair<Observation, KpiSample> step() = 0;
};

// One arrival batch: truncated-normal draw on [0, inf), rounded to a
// non-negative integer user count.
int generate_arrivals(Rng& rng, const SliceConfig& cfg);

// Discrete-time slice simulation. Arrival batches stay active for
// session_len_s steps; demand is linear in the active user count; the
// enforced CPU limit caps service and per-UE throughput collapses as
// phi^degradation_exponent when the slice is under-provisioned.
//
// Arrivals for a step are drawn at the preceding step boundary, so the
// observation handed to the controller carries the traffic its allocation
// will serve, paired with the previous step's measured CPU usage.
class SliceEnv final : public EnvInterface {
 public:
  explicit SliceEnv(SliceConfig cfg);

  Observation reset(uint64_t seed) override;
  void apply_cpu_limit(double mc) override;
  std::pair<Observation, KpiSample> step() override;

  const EnvState& state() const { return state_; }
  const SliceConfig& config() const { return cfg_; }

 private:
  void advance_arrivals();

  SliceConfig cfg_;
  EnvState state_;
  Rng rng_;
  std::deque<int> window_;  // arrival batches still active
};

struct CalibrationOptions {
  double tolerance = 0.03;
  int seeds = 10;
  int steps = 900;
  uint64_t base_seed = 9000;
};

struct CalibrationResult {
  SliceConfig config;
  double achieved_beta = 0.0;
};

// Mean degradation over seeds for a fixed allocation held for `steps` steps.
double measure_static_beta(const SliceConfig& cfg, double alloc_mc, int seeds,
                           int steps, uint64_t base_seed);

// Grid search over (traffic_std, session_len_s, degradation_exponent) so a
// fixed allocation of reference_alloc_mc yields a mean degradation within
// tolerance of target_beta. Searched ranges: traffic_std in
// {0.5, 0.625, ..., 1.5} x the base value, session_len_s in {1, 2, 3},
// degradation_exponent in {2, 4, ..., 20}. Deterministic for fixed options;
// ties break toward the earliest grid point.
CalibrationResult calibrate(const SliceConfig& base, double reference_alloc_mc,
                            double target_beta,
                            const CalibrationOptions& opts = {});

}  // namespace slicerl
