#pragma once

#include <span>
#include <string>
#include <vector>

#include "slicerl/core.hpp"

namespace slicerl {

// Per-step traffic x(t) and per-UE throughput q(t) over one run horizon.
struct QosTrace {
  std::vector<double> traffic;     // users/second, >= 0
  std::vector<double> throughput;  // Mbps, >= 0
  void validate() const;           // throws std::invalid_argument
};

// Normalized slice load in [0,1], derived from the active user count.
struct LoadEstimate {
  double value = 0.0;
};

// r = 1 - (1/n) * sum |a_i - d_i| over normalized allocations a and load
// estimates d, both componentwise in [0,1]. Result is in [0,1]; it is 1
// exactly when a == d and penalizes over- and under-allocation alike.
double reward(std::span<const double> actions, std::span<const double> loads);

// d = clamp(active_users * per_ue_demand_mc / load_norm_max_mc, 0, 1)
LoadEstimate load_estimate(double active_users, const SliceConfig& cfg);

// Traffic-weighted proportion of time throughput is at or below the
// threshold: sum x(t)*1[q(t) <= q_thresh] / sum x(t). A sample exactly at
// the threshold counts as a violation. Zero total traffic is defined as
// zero degradation; summaries carry that convention as a comment line.
double qos_degradation(const QosTrace& trace, double q_thresh_mbps);

// Fraction of samples with throughput strictly above the threshold, so
// sla_fraction + violation fraction = 1 under the degradation indicator.
double sla_fraction(const QosTrace& trace, double q_thresh_mbps);

// Arithmetic mean of the applied allocation over a non-empty trace.
double mean_allocation(std::span<const KpiSample> rows);

QosTrace qos_trace_from(std::span<const KpiSample> rows);

struct MetricsSummary {
  double mean_allocation_mc = 0.0;
  double beta = 0.0;
  double sla_fraction = 0.0;
  double mean_reward = 0.0;
  std::string to_text() const;  // key=value lines
};

MetricsSummary summarize(std::span<const KpiSample> rows,
                         const SliceConfig& cfg);

}  // namespace slicerl
