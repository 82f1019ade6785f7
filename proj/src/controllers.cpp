#include "slicerl/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace slicerl {

StaticController::StaticController(double fixed_mc, const SliceConfig& cfg) {
  cfg.validate();
  if (fixed_mc < cfg.cpu_min_mc || fixed_mc > cfg.cpu_max_mc) {
    throw ConfigError("static controller allocation out of range");
  }
  action_ = fixed_mc / cfg.load_norm_max_mc;
}

NormalizedAction StaticController::act(const Observation&, double, double) {
  return NormalizedAction{action_};
}

ThresholdController::ThresholdController(double theta_hi, double theta_lo,
                                         double step_mc,
                                         const SliceConfig& cfg)
    : theta_hi_(theta_hi), theta_lo_(theta_lo), step_mc_(step_mc), cfg_(cfg) {
  cfg_.validate();
  if (!(theta_lo_ > 0.0 && theta_lo_ < theta_hi_ && theta_hi_ < 1.0)) {
    throw ConfigError("threshold controller requires 0 < theta_lo < theta_hi < 1");
  }
  if (!(step_mc_ > 0.0)) throw ConfigError("threshold step must be > 0");
}

NormalizedAction ThresholdController::act(const Observation&,
                                          double last_usage_mc,
                                          double last_alloc_mc) {
  const double utilization =
      last_alloc_mc > 0.0 ? last_usage_mc / last_alloc_mc : 0.0;
  double next = last_alloc_mc;
  if (utilization > theta_hi_) {
    next += step_mc_;
  } else if (utilization < theta_lo_) {
    next -= step_mc_;
  }
  next = std::clamp(next, cfg_.cpu_min_mc, cfg_.cpu_max_mc);
  return NormalizedAction{next / cfg_.load_norm_max_mc};
}

ProportionalController::ProportionalController(double headroom,
                                               const SliceConfig& cfg)
    : headroom_(headroom), cfg_(cfg) {
  cfg_.validate();
  if (!(headroom_ >= 1.0)) throw ConfigError("headroom must be >= 1");
}

NormalizedAction ProportionalController::act(const Observation& obs, double,
                                             double) {
  const double estimated_demand_mc =
      obs.traffic_norm * cfg_.traffic_norm_max * cfg_.per_ue_demand_mc;
  const double alloc = std::clamp(headroom_ * estimated_demand_mc,
                                  cfg_.cpu_min_mc, cfg_.cpu_max_mc);
  return NormalizedAction{alloc / cfg_.load_norm_max_mc};
}

RlController::RlController(PolicyParameters params, bool deterministic,
                           uint64_t seed)
    : params_(std::move(params)), deterministic_(deterministic), rng_(seed) {
  if (!params_.finite()) {
    throw FaultError("rl controller: non-finite parameters");
  }
}

NormalizedAction RlController::act(const Observation& obs, double, double) {
  if (deterministic_) {
    const PolicyOutput out = policy_forward(params_, obs);
    return NormalizedAction{std::clamp(out.mean, 0.0, 1.0)};
  }
  return sample_action(params_, obs, rng_).action;
}

}  // namespace slicerl
