// slicerl command line: train / eval / sweep / calibrate / analyze for the
// simulated 5G slice CPU-allocation loop.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slicerl/controllers.hpp"
#include "slicerl/core.hpp"
#include "slicerl/env.hpp"
#include "slicerl/harness.hpp"
#include "slicerl/metrics.hpp"
#include "slicerl/ppo.hpp"

namespace fs = std::filesystem;
using namespace slicerl;

namespace {

SliceConfig load_config(const std::string& path) {
  if (path.empty()) return SliceConfig{};
  return SliceConfig::from_file(path);
}

void write_summary(const MetricsSummary& summary, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary: " + path.string());
  out << summary.to_text();
}

struct ControllerOptions {
  std::string id = "static";
  std::string checkpoint;
  bool stochastic = false;
  double static_alloc_mc = 2945.72;
  double theta_hi = 0.8;
  double theta_lo = 0.3;
  double step_mc = 500.0;
  double headroom = 1.2;
};

std::unique_ptr<ControllerInterface> make_controller(
    const ControllerOptions& opts, const SliceConfig& cfg, uint64_t seed) {
  if (opts.id == "static") {
    return std::make_unique<StaticController>(opts.static_alloc_mc, cfg);
  }
  if (opts.id == "threshold") {
    return std::make_unique<ThresholdController>(opts.theta_hi, opts.theta_lo,
                                                 opts.step_mc, cfg);
  }
  if (opts.id == "proportional") {
    return std::make_unique<ProportionalController>(opts.headroom, cfg);
  }
  if (opts.id == "ppo") {
    if (opts.checkpoint.empty()) {
      throw ConfigError("controller 'ppo' requires --checkpoint");
    }
    Checkpoint ck = load_checkpoint(opts.checkpoint);
    return std::make_unique<RlController>(std::move(ck.params),
                                          !opts.stochastic,
                                          split_seed(seed, 2));
  }
  throw ConfigError("unknown controller '" + opts.id + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop CPU allocation for a simulated 5G slice"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 1;
  int steps = kDefaultEpisodeSteps;
  std::string out_dir = "out";
  bool realtime = false;

  app.add_option("--config", config_path, "config file (key=value)");
  app.add_option("--seed", seed, "base random seed");
  app.add_option("--steps", steps, "steps per episode");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--realtime", realtime, "sleep one control period per step");

  // train
  auto* train_cmd = app.add_subcommand("train", "train the PPO policy online");
  int episodes = 5;
  std::string checkpoint_path;
  std::string warmstart_path;
  train_cmd->add_option("--episodes", episodes, "training episodes");
  train_cmd->add_option("--checkpoint", checkpoint_path,
                        "checkpoint output path");
  train_cmd->add_option("--warmstart-trace", warmstart_path,
                        "experimental: replay a trace before online training");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "run a controller for one episode");
  ControllerOptions ctrl_opts;
  eval_cmd->add_option("--controller", ctrl_opts.id,
                       "ppo|static|threshold|proportional");
  eval_cmd->add_option("--checkpoint", ctrl_opts.checkpoint,
                       "policy checkpoint (controller 'ppo')");
  eval_cmd->add_flag("--stochastic", ctrl_opts.stochastic,
                     "sample actions instead of using the policy mean");
  eval_cmd->add_option("--static-alloc", ctrl_opts.static_alloc_mc,
                       "fixed allocation, millicores");
  eval_cmd->add_option("--theta-hi", ctrl_opts.theta_hi,
                       "threshold controller upper utilization");
  eval_cmd->add_option("--theta-lo", ctrl_opts.theta_lo,
                       "threshold controller lower utilization");
  eval_cmd->add_option("--step-mc", ctrl_opts.step_mc,
                       "threshold controller step, millicores");
  eval_cmd->add_option("--headroom", ctrl_opts.headroom,
                       "proportional controller headroom factor");

  // sweep
  auto* sweep_cmd =
      app.add_subcommand("sweep", "mean reward vs fixed allocation");
  int sweep_seeds = 10;
  double grid_min = 500.0;
  double grid_max = 4000.0;
  double grid_step = 500.0;
  sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per grid point");
  sweep_cmd->add_option("--grid-min", grid_min, "grid start, millicores");
  sweep_cmd->add_option("--grid-max", grid_max, "grid end, millicores");
  sweep_cmd->add_option("--grid-step", grid_step, "grid step, millicores");

  // calibrate
  auto* cal_cmd = app.add_subcommand(
      "calibrate", "fit the traffic/congestion knobs to a degradation target");
  double ref_alloc = 2945.72;
  double target_beta = 0.10;
  int cal_seeds = 10;
  cal_cmd->add_option("--ref-alloc", ref_alloc,
                      "reference fixed allocation, millicores");
  cal_cmd->add_option("--target-beta", target_beta, "degradation target");
  cal_cmd->add_option("--seeds", cal_seeds, "seeds per grid point");

  // analyze
  auto* ana_cmd = app.add_subcommand("analyze", "metrics summary of a trace");
  std::string trace_path;
  double ana_ref_alloc = 0.0;
  double ana_ref_beta = -1.0;
  std::string ana_out;
  ana_cmd->add_option("trace", trace_path, "trace CSV path")->required();
  ana_cmd->add_option("--ref-alloc", ana_ref_alloc,
                      "reference allocation for a comparison row");
  ana_cmd->add_option("--ref-beta", ana_ref_beta,
                      "reference degradation for a comparison row");
  ana_cmd->add_option("--summary-out", ana_out, "write the summary here too");

  CLI11_PARSE(app, argc, argv);

  try {
    const SliceConfig cfg = load_config(config_path);
    const fs::path out(out_dir);

    if (*train_cmd) {
      fs::create_directories(out);
      SliceEnv env(cfg);
      PolicyParameters warm;
      bool have_warm = false;
      if (!warmstart_path.empty()) {
        // replayed updates reuse the training seed streams
        Rng init_rng(split_seed(seed, 1));
        PpoUpdater updater(PpoHyperparams{}, split_seed(seed, 3));
        warm = PolicyParameters::init(default_net_sizes(), default_net_sizes(),
                                      kDefaultLogStdInit, init_rng);
        const RunTrace replay = read_trace_csv(fs::path(warmstart_path));
        warm = warmstart_from_trace(warm, updater, replay, cfg);
        have_warm = true;
        std::cout << "warmstart: replayed " << replay.rows.size()
                  << " steps (experimental)\n";
      }
      TrainResult result;
      const PolicyParameters* initial = have_warm ? &warm : nullptr;
      if (realtime) {
        RealtimePacer paced(env, cfg.control_period_s);
        result = train(paced, cfg, PpoHyperparams{}, episodes, steps, seed,
                       initial);
      } else {
        result = train(env, cfg, PpoHyperparams{}, episodes, steps, seed,
                       initial);
      }
      if (result.halted) {
        std::cerr << "training halted: " << result.halt_cause << '\n';
      }
      const fs::path ck = checkpoint_path.empty()
                              ? out / "checkpoint.txt"
                              : fs::path(checkpoint_path);
      save_checkpoint(result.params, PpoHyperparams{}, ck);
      write_trace_csv(result.trace, out / "train_trace.csv");
      write_reward_curve_csv(result.reward_curve, out / "reward_curve.csv");
      const MetricsSummary summary = analyze_trace(result.trace, cfg);
      write_summary(summary, out / "summary.txt");
      std::cout << summary.to_text();
      std::cout << "checkpoint=" << ck.string() << '\n';
      return result.halted ? 2 : 0;
    }

    if (*eval_cmd) {
      fs::create_directories(out);
      SliceEnv env(cfg);
      auto ctrl = make_controller(ctrl_opts, cfg, seed);
      RunTrace trace;
      if (realtime) {
        RealtimePacer paced(env, cfg.control_period_s);
        trace = run_episode(paced, *ctrl, steps, cfg, seed, ctrl_opts.id);
      } else {
        trace = run_episode(env, *ctrl, steps, cfg, seed, ctrl_opts.id);
      }
      write_trace_csv(trace, out / "eval_trace.csv");
      const MetricsSummary summary = analyze_trace(trace, cfg);
      write_summary(summary, out / "summary.txt");
      std::cout << summary.to_text();
      if (!trace.meta.incomplete_cause.empty()) {
        std::cerr << "run incomplete: " << trace.meta.incomplete_cause << '\n';
        return 2;
      }
      return 0;
    }

    if (*sweep_cmd) {
      fs::create_directories(out);
      std::vector<double> grid;
      for (double a = grid_min; a <= grid_max + 1e-9; a += grid_step) {
        grid.push_back(a);
      }
      const auto rows = sweep_allocation(cfg, grid, steps, sweep_seeds, seed);
      write_sweep_csv(rows, out / "sweep.csv");
      std::printf("%12s %10s %12s %8s %12s\n", "alloc_mc", "alloc_norm",
                  "mean_reward", "beta", "sla_fraction");
      for (const SweepRow& row : rows) {
        std::printf("%12.2f %10.4f %12.4f %8.4f %12.4f\n", row.allocation_mc,
                    row.allocation_mc / cfg.load_norm_max_mc, row.mean_reward,
                    row.beta, row.sla_fraction);
      }
      return 0;
    }

    if (*cal_cmd) {
      fs::create_directories(out);
      CalibrationOptions opts;
      opts.seeds = cal_seeds;
      opts.steps = steps;
      opts.base_seed = seed;
      const CalibrationResult result =
          calibrate(cfg, ref_alloc, target_beta, opts);
      result.config.save(out / "calibrated.cfg");
      std::printf("achieved_beta=%.6f\n", result.achieved_beta);
      std::printf("traffic_std=%.6f\n", result.config.traffic_std);
      std::printf("session_len_s=%d\n", result.config.session_len_s);
      std::printf("degradation_exponent=%.6f\n",
                  result.config.degradation_exponent);
      std::cout << "config=" << (out / "calibrated.cfg").string() << '\n';
      return 0;
    }

    if (*ana_cmd) {
      const RunTrace trace = read_trace_csv(fs::path(trace_path));
      const MetricsSummary summary = analyze_trace(trace, cfg);
      std::cout << summary.to_text();
      if (ana_ref_alloc > 0.0) {
        std::printf("cpu_ratio=%.6f\n",
                    summary.mean_allocation_mc / ana_ref_alloc);
      }
      if (ana_ref_beta >= 0.0) {
        std::printf("beta_delta=%.6f\n", summary.beta - ana_ref_beta);
      }
      if (!ana_out.empty()) write_summary(summary, fs::path(ana_out));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
