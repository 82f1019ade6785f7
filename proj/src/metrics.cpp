#include "slicerl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace slicerl {

void QosTrace::validate() const {
  if (traffic.size() != throughput.size()) {
    throw std::invalid_argument("QosTrace: traffic/throughput length mismatch");
  }
  if (traffic.empty()) throw std::invalid_argument("QosTrace: empty trace");
  for (double x : traffic) {
    if (!(x >= 0.0)) throw std::invalid_argument("QosTrace: negative traffic");
  }
  for (double q : throughput) {
    if (!(q >= 0.0))
      throw std::invalid_argument("QosTrace: negative throughput");
  }
}

double reward(std::span<const double> actions, std::span<const double> loads) {
  if (actions.empty() || actions.size() != loads.size()) {
    throw std::invalid_argument(
        "reward: action/load sequences must be non-empty and equal length");
  }
  double gap = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    gap += std::abs(actions[i] - loads[i]);
  }
  return 1.0 - gap / static_cast<double>(actions.size());
}

LoadEstimate load_estimate(double active_users, const SliceConfig& cfg) {
  const double d =
      active_users * cfg.per_ue_demand_mc / cfg.load_norm_max_mc;
  return LoadEstimate{std::clamp(d, 0.0, 1.0)};
}

double qos_degradation(const QosTrace& trace, double q_thresh_mbps) {
  trace.validate();
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < trace.traffic.size(); ++t) {
    total += trace.traffic[t];
    if (trace.throughput[t] <= q_thresh_mbps) weighted += trace.traffic[t];
  }
  if (total <= 0.0) return 0.0;  // no traffic, no degradation
  return weighted / total;
}

double sla_fraction(const QosTrace& trace, double q_thresh_mbps) {
  trace.validate();
  std::size_t above = 0;
  for (double q : trace.throughput) {
    if (q > q_thresh_mbps) ++above;
  }
  return static_cast<double>(above) /
         static_cast<double>(trace.throughput.size());
}

double mean_allocation(std::span<const KpiSample> rows) {
  if (rows.empty()) throw std::invalid_argument("mean_allocation: empty trace");
  double sum = 0.0;
  for (const KpiSample& row : rows) sum += row.allocation_mc;
  return sum / static_cast<double>(rows.size());
}

QosTrace qos_trace_from(std::span<const KpiSample> rows) {
  QosTrace trace;
  trace.traffic.reserve(rows.size());
  trace.throughput.reserve(rows.size());
  for (const KpiSample& row : rows) {
    trace.traffic.push_back(static_cast<double>(row.active_users));
    trace.throughput.push_back(row.throughput_mbps);
  }
  return trace;
}

std::string MetricsSummary::to_text() const {
  char buf[256];
  std::ostringstream out;
  std::snprintf(buf, sizeof(buf), "mean_allocation_mc=%.6f\n",
                mean_allocation_mc);
  out << buf;
  std::snprintf(buf, sizeof(buf), "beta=%.6f\n", beta);
  out << buf;
  std::snprintf(buf, sizeof(buf), "sla_fraction=%.6f\n", sla_fraction);
  out << buf;
  std::snprintf(buf, sizeof(buf), "mean_reward=%.6f\n", mean_reward);
  out << buf;
  out << "# convention: beta=0 when total traffic is 0\n";
  return out.str();
}

MetricsSummary summarize(std::span<const KpiSample> rows,
                         const SliceConfig& cfg) {
  if (rows.empty()) throw std::invalid_argument("summarize: empty trace");
  MetricsSummary s;
  s.mean_allocation_mc = mean_allocation(rows);
  const QosTrace trace = qos_trace_from(rows);
  s.beta = qos_degradation(trace, cfg.qos_threshold_mbps);
  s.sla_fraction = sla_fraction(trace, cfg.qos_threshold_mbps);
  double reward_sum = 0.0;
  std::size_t reward_count = 0;
  for (const KpiSample& row : rows) {
    if (row.reward.has_value()) {
      reward_sum += *row.reward;
      ++reward_count;
    }
  }
  s.mean_reward =
      reward_count > 0 ? reward_sum / static_cast<double>(reward_count) : 0.0;
  return s;
}

}  // namespace slicerl
