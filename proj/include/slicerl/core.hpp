#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace slicerl {

// Invalid configuration value or malformed config file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite value where a finite one is required.
class FaultError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed structured input (CSV, checkpoint); carries the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Slice-level constants: CPU limit range, normalization bounds, the traffic
// model and the congestion-model calibration knobs. All controllers and the
// environment share one instance.
struct SliceConfig {
  double cpu_min_mc = 500.0;              // millicores
  double cpu_max_mc = 4000.0;             // millicores
  double cpu_grid_mc = 500.0;             // snapping granularity, millicores
  bool snap_to_grid = false;              // snap mapped allocations to the grid
  double traffic_mean = 5.0;              // users/second, pre-truncation
  double traffic_std = 3.0;               // users/second
  int session_len_s = 1;                  // seconds an arrival batch stays active
  double per_ue_demand_mc = 280.0;        // millicores per active user
  double per_ue_target_rate_mbps = 20.0;  // per-UE rate when fully served
  double degradation_exponent = 3.0;      // throughput collapse exponent, >= 1
  double usage_noise_rel = 0.02;          // relative noise on measured usage
  double qos_threshold_mbps = 1.0;        // SLA threshold
  double load_norm_max_mc = 4000.0;       // min-max bound for usage and load
  double traffic_norm_max = 20.0;         // min-max bound for user count
  int control_period_s = 1;               // fixed at 1

  void validate() const;      // throws ConfigError
  std::string to_text() const;  // canonical key=value serialization
  uint64_t hash() const;        // FNV-1a 64 over to_text()

  // key=value text, one key per line; '#' comments and blank lines are
  // skipped; unknown keys are an error; missing keys keep defaults.
  static SliceConfig from_text(const std::string& text);
  static SliceConfig from_file(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// One second of observed slice state.
struct KpiSample {
  long step = 0;
  int active_users = 0;
  double cpu_usage_mc = 0.0;
  double throughput_mbps = 0.0;  // per-UE, UE side
  double allocation_mc = 0.0;
  std::optional<double> reward;  // in [0,1] when set
};

// Min-max normalized state fed to controllers; both components in [0,1].
struct Observation {
  double traffic_norm = 0.0;
  double cpu_usage_norm = 0.0;
};

// Continuous action in [0,1]; maps linearly to a CPU limit.
struct NormalizedAction {
  double value = 0.0;
};

// Action -> CPU limit in millicores: clamp the action to [0,1], scale by
// load_norm_max_mc, clamp to [cpu_min_mc, cpu_max_mc]; when snap_to_grid is
// set, round to the nearest grid multiple after clamping.
double map_action(NormalizedAction a, const SliceConfig& cfg);

Observation normalize_observation(double users, double usage_mc,
                                  const SliceConfig& cfg);

// Round to 6 decimal places, the trace file resolution. Logged quantities
// are quantized at the point they are produced so in-memory values and
// re-parsed CSV values are identical doubles.
double round6(double x);

}  // namespace slicerl
