#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slicerl/controllers.hpp"
#include "slicerl/core.hpp"
#include "slicerl/env.hpp"
#include "slicerl/metrics.hpp"
#include "slicerl/ppo.hpp"

namespace slicerl {

constexpr int kDefaultEpisodeSteps = 900;
constexpr int kRewardWindow = 100;

struct TraceMetadata {
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  std::string controller_id;
  int episodes = 1;
  std::string incomplete_cause;  // non-empty when the run aborted early
};

// Ordered per-step samples plus run metadata; the CSV form round-trips.
struct RunTrace {
  TraceMetadata meta;
  std::vector<KpiSample> rows;
};

// One closed-loop episode: observe -> act -> map -> apply -> step ->
// score. The reward pairs the applied normalized allocation with the load
// estimate of the traffic that materialized under it; an environment or
// controller fault ends the run early with the partial trace flagged.
RunTrace run_episode(EnvInterface& env, ControllerInterface& ctrl, int steps,
                     const SliceConfig& cfg, uint64_t seed,
                     const std::string& controller_id);

struct RewardPoint {
  double reward = 0.0;
  double moving_avg = 0.0;  // window of kRewardWindow steps
};

struct TrainResult {
  PolicyParameters params;
  RunTrace trace;  // all episodes, globally indexed steps
  std::vector<RewardPoint> reward_curve;
  bool halted = false;
  std::string halt_cause;
};

// Online training: per episode, rollouts of hp.rollout_len steps are
// interleaved with PPO updates (value-bootstrapped at rollout boundaries;
// a trailing partial rollout is discarded). The environment is reset once;
// the experience buffer is cleared at each episode start. An update fault
// halts training with the last good parameters retained. Passing
// initial_params (e.g. warmstarted ones) skips the fresh initialization.
TrainResult train(EnvInterface& env, const SliceConfig& cfg,
                  const PpoHyperparams& hp, int episodes,
                  int steps_per_episode, uint64_t seed,
                  const PolicyParameters* initial_params = nullptr);

// Experimental: replay an existing trace through PPO updates before online
// training. Log-probs and values are evaluated under the current policy at
// replay time since traces store neither.
PolicyParameters warmstart_from_trace(const PolicyParameters& params,
                                      PpoUpdater& updater, const RunTrace& trace,
                                      const SliceConfig& cfg);

struct SweepRow {
  double allocation_mc = 0.0;
  double mean_reward = 0.0;
  double beta = 0.0;
  double sla_fraction = 0.0;
};

// Fixed-allocation sweep: per grid point, static-controller runs across
// seeds; metrics are seed-averaged.
std::vector<SweepRow> sweep_allocation(const SliceConfig& cfg,
                                       std::span<const double> grid, int steps,
                                       int seeds, uint64_t base_seed);

void write_trace_csv(const RunTrace& trace, std::ostream& out);
void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path);
RunTrace read_trace_csv(std::istream& in);  // ParseError carries line numbers
RunTrace read_trace_csv(const std::filesystem::path& path);

void write_reward_curve_csv(std::span<const RewardPoint> curve,
                            const std::filesystem::path& path);
void write_sweep_csv(std::span<const SweepRow> rows,
                     const std::filesystem::path& path);

MetricsSummary analyze_trace(const RunTrace& trace, const SliceConfig& cfg);

// Largest |reward column - recomputation from the allocation and traffic
// columns|; zero for any trace this harness wrote.
double reward_column_max_error(const RunTrace& trace, const SliceConfig& cfg);

// EnvInterface decorator that sleeps one control period per step for
// live-backend parity.
class RealtimePacer final : public EnvInterface {
 public:
  explicit RealtimePacer(EnvInterface& inner, int period_s = 1)
      : inner_(inner), period_s_(period_s) {}
  Observation reset(uint64_t seed) override { return inner_.reset(seed); }
  void apply_cpu_limit(double mc) override { inner_.apply_cpu_limit(mc); }
  std::pair<Observation, KpiSample> step() override;

 private:
  EnvInterface& inner_;
  int period_s_;
};

}  // namespace slicerl
