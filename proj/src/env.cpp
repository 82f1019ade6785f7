#include "slicerl/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "slicerl/metrics.hpp"

namespace slicerl {

int generate_arrivals(Rng& rng, const SliceConfig& cfg) {
  if (cfg.traffic_std <= 0.0) {
    return static_cast<int>(std::max(0.0, std::round(cfg.traffic_mean)));
  }
  double z = rng.normal(cfg.traffic_mean, cfg.traffic_std);
  while (z < 0.0) z = rng.normal(cfg.traffic_mean, cfg.traffic_std);
  return static_cast<int>(std::round(z));
}

SliceEnv::SliceEnv(SliceConfig cfg) : cfg_(std::move(cfg)), rng_(0) {
  cfg_.validate();
  reset(0);
}

Observation SliceEnv::reset(uint64_t seed) {
  rng_ = Rng(seed);
  window_.assign(static_cast<std::size_t>(cfg_.session_len_s), 0);
  state_ = EnvState{};
  state_.allocation_mc = cfg_.cpu_min_mc;
  state_.throughput_mbps = cfg_.per_ue_target_rate_mbps;
  advance_arrivals();
  return normalize_observation(state_.active_users, state_.cpu_usage_mc, cfg_);
}

void SliceEnv::apply_cpu_limit(double mc) {
  if (mc < cfg_.cpu_min_mc - 1e-9 || mc > cfg_.cpu_max_mc + 1e-9) {
    throw std::invalid_argument("apply_cpu_limit: allocation out of range");
  }
  state_.allocation_mc = std::clamp(mc, cfg_.cpu_min_mc, cfg_.cpu_max_mc);
}

void SliceEnv::advance_arrivals() {
  window_.pop_front();
  window_.push_back(generate_arrivals(rng_, cfg_));
  int total = 0;
  for (int batch : window_) total += batch;
  state_.active_users = total;
}

std::pair<Observation, KpiSample> SliceEnv::step() {
  state_.demand_mc = state_.active_users * cfg_.per_ue_demand_mc;
  const double phi =
      state_.demand_mc <= 0.0
          ? 1.0
          : std::min(1.0, state_.allocation_mc / state_.demand_mc);
  const double eps = rng_.uniform(-cfg_.usage_noise_rel, cfg_.usage_noise_rel);
  state_.cpu_usage_mc = round6(std::max(
      0.0, std::min(state_.allocation_mc, state_.demand_mc) * (1.0 + eps)));
  state_.throughput_mbps =
      round6(state_.active_users > 0
                 ? cfg_.per_ue_target_rate_mbps *
                       std::pow(phi, cfg_.degradation_exponent)
                 : cfg_.per_ue_target_rate_mbps);

  KpiSample kpi;
  kpi.step = state_.step;
  kpi.active_users = state_.active_users;
  kpi.cpu_usage_mc = state_.cpu_usage_mc;
  kpi.throughput_mbps = state_.throughput_mbps;
  kpi.allocation_mc = state_.allocation_mc;

  ++state_.step;
  advance_arrivals();
  const Observation obs =
      normalize_observation(state_.active_users, state_.cpu_usage_mc, cfg_);
  return {obs, kpi};
}

double measure_static_beta(const SliceConfig& cfg, double alloc_mc, int seeds,
                           int steps, uint64_t base_seed) {
  if (seeds < 1 || steps < 1) {
    throw std::invalid_argument("measure_static_beta: seeds and steps >= 1");
  }
  double beta_sum = 0.0;
  SliceEnv env(cfg);
  for (int s = 0; s < seeds; ++s) {
    env.reset(split_seed(base_seed, static_cast<uint64_t>(s)));
    env.apply_cpu_limit(alloc_mc);
    QosTrace trace;
    trace.traffic.reserve(steps);
    trace.throughput.reserve(steps);
    for (int t = 0; t < steps; ++t) {
      const auto [obs, kpi] = env.step();
      (void)obs;
      trace.traffic.push_back(static_cast<double>(kpi.active_users));
      trace.throughput.push_back(kpi.throughput_mbps);
    }
    beta_sum += qos_degradation(trace, cfg.qos_threshold_mbps);
  }
  return beta_sum / seeds;
}

namespace {
constexpr double kStdMultipliers[] = {0.5,   0.625, 0.75,  0.875, 1.0,
                                      1.125, 1.25,  1.375, 1.5};
constexpr int kSessionGrid[] = {1, 2, 3};
constexpr double kExponentGrid[] = {2.0,  4.0,  6.0,  8.0,  10.0,
                                    12.0, 14.0, 16.0, 18.0, 20.0};
}  // namespace

CalibrationResult calibrate(const SliceConfig& base, double reference_alloc_mc,
                            double target_beta,
                            const CalibrationOptions& opts) {
  base.validate();
  if (!(target_beta > 0.0 && target_beta < 1.0)) {
    throw std::invalid_argument("calibrate: target_beta must be in (0,1)");
  }
  double best_gap = std::numeric_limits<double>::infinity();
  double best_beta = 0.0;
  SliceConfig best_cfg = base;

  for (int session : kSessionGrid) {
    for (double mult : kStdMultipliers) {
      for (double exponent : kExponentGrid) {
        SliceConfig cand = base;
        cand.session_len_s = session;
        cand.traffic_std = base.traffic_std * mult;
        cand.degradation_exponent = exponent;
        const double beta = measure_static_beta(
            cand, reference_alloc_mc, opts.seeds, opts.steps, opts.base_seed);
        const double gap = std::abs(beta - target_beta);
        if (gap < best_gap) {
          best_gap = gap;
          best_beta = beta;
          best_cfg = cand;
        }
      }
    }
  }

  if (best_gap > opts.tolerance) {
    char msg[256];
    std::snprintf(msg, sizeof(msg),
                  "calibration failed: best achieved beta %.6f vs target %.6f "
                  "(tolerance %.6f)",
                  best_beta, target_beta, opts.tolerance);
    throw CalibrationError(msg, best_beta);
  }
  return CalibrationResult{best_cfg, best_beta};
}

}  // namespace slicerl
