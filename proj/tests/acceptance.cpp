// Acceptance suite: end-to-end checks of the reward metric, degradation
// metric, gradient correctness, sweep shape, training convergence, policy
// efficiency, determinism, baseline sanity, and inference latency. Prints
// one [PASS]/[FAIL] line per criterion; exits non-zero on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "slicerl/controllers.hpp"
#include "slicerl/core.hpp"
#include "slicerl/env.hpp"
#include "slicerl/harness.hpp"
#include "slicerl/metrics.hpp"
#include "slicerl/ppo.hpp"
#include "slicerl/rng.hpp"

namespace fs = std::filesystem;
using namespace slicerl;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int number, const std::string& name, bool pass,
            const std::string& detail, double elapsed_s, double budget_s) {
  const bool in_budget = elapsed_s < budget_s;
  if (!pass || !in_budget) ++g_failures;
  std::printf("[%s] criterion %d: %s (%s; %.2fs of %.0fs budget%s)\n",
              pass && in_budget ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str(), elapsed_s, budget_s,
              in_budget ? "" : ", over budget");
  std::fflush(stdout);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing:" + path.string() + ">";
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---- criterion 1: reward vs direct-sum oracle ----

void criterion_reward() {
  const auto start = Clock::now();
  Rng rng(1001);
  double max_err = 0.0;
  bool bounds_ok = true;
  for (int it = 0; it < 1000; ++it) {
    const std::size_t n = 1 + rng.next_u64() % 6;
    std::vector<double> a(n);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform01();
      d[i] = rng.uniform01();
    }
    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) gap += std::abs(a[i] - d[i]);
    const double oracle = 1.0 - gap / static_cast<double>(n);
    max_err = std::max(max_err, std::abs(reward(a, d) - oracle));
    if (reward(a, a) != 1.0) bounds_ok = false;
  }
  const std::vector<double> hi{1.0};
  const std::vector<double> lo{0.0};
  bounds_ok = bounds_ok && reward(hi, hi) == 1.0 && reward(hi, lo) == 0.0;

  char detail[128];
  std::snprintf(detail, sizeof(detail), "max |err| %.2e, boundaries %s",
                max_err, bounds_ok ? "exact" : "WRONG");
  report(1, "reward matches the direct-sum oracle",
         max_err <= 1e-12 && bounds_ok, detail, seconds_since(start), 1.0);
}

// ---- criterion 2: degradation metric vs brute-force oracle ----

void criterion_beta() {
  const auto start = Clock::now();
  Rng rng(1002);
  double max_err = 0.0;
  for (int it = 0; it < 1000; ++it) {
    const std::size_t n = 1 + rng.next_u64() % 50;
    QosTrace trace;
    for (std::size_t t = 0; t < n; ++t) {
      trace.traffic.push_back(std::floor(rng.uniform(0.0, 15.0)));
      trace.throughput.push_back(rng.uniform(0.0, 2.5));
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      den += trace.traffic[t];
      if (trace.throughput[t] <= 1.0) num += trace.traffic[t];
    }
    const double oracle = den == 0.0 ? 0.0 : num / den;
    max_err =
        std::max(max_err, std::abs(qos_degradation(trace, 1.0) - oracle));
  }
  const QosTrace hand{{2, 3, 5}, {0.5, 2.0, 0.9}};
  const bool hand_ok = qos_degradation(hand, 1.0) == 0.7;

  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "max |err| %.2e, hand instance %s", max_err,
                hand_ok ? "0.7 exact" : "WRONG");
  report(2, "degradation matches the brute-force oracle",
         max_err <= 1e-12 && hand_ok, detail, seconds_since(start), 1.0);
}

// ---- criterion 3: analytic gradients vs central finite differences ----

void criterion_gradients() {
  const auto start = Clock::now();
  PpoHyperparams hp;
  hp.entropy_coef = 0.01;
  const double step = 1e-5;
  Rng rng(1003);
  double worst_rel = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng init(2000 + trial);
    PolicyParameters params =
        PolicyParameters::init({2, 4, 1}, {2, 4, 1}, -0.7, init);
    std::vector<Transition> batch;
    std::vector<double> adv;
    std::vector<double> ret;
    for (int i = 0; i < 8; ++i) {
      Transition tr;
      tr.state = Observation{rng.uniform01(), rng.uniform01()};
      const PolicyOutput fwd = policy_forward(params, tr.state);
      tr.raw_action = fwd.mean + std::exp(fwd.log_std) * rng.normal();
      tr.action.value = std::clamp(tr.raw_action, 0.0, 1.0);
      // old log-probs offset so ratios stay inside the clip interval and
      // the loss is smooth at the differencing point
      tr.log_prob = gaussian_log_prob(tr.raw_action, fwd.mean, fwd.log_std) +
                    rng.uniform(-0.1, 0.1);
      tr.value = fwd.value;
      batch.push_back(tr);
      adv.push_back(rng.normal());
      ret.push_back(rng.uniform(-1.0, 1.0));
    }
    const PpoLoss analytic = ppo_loss(params, batch, adv, ret, hp);
    auto grads = param_pointers(analytic.gradients);
    auto values = param_pointers(params);
    for (std::size_t i = 0; i < values.size(); ++i) {
      double* p = const_cast<double*>(values[i]);
      const double saved = *p;
      *p = saved + step;
      const double up = ppo_loss(params, batch, adv, ret, hp).total;
      *p = saved - step;
      const double down = ppo_loss(params, batch, adv, ret, hp).total;
      *p = saved;
      const double fd = (up - down) / (2.0 * step);
      const double rel = std::abs(*grads[i] - fd) /
                         std::max({std::abs(*grads[i]), std::abs(fd), 1e-4});
      worst_rel = std::max(worst_rel, rel);
    }
  }
  char detail[96];
  std::snprintf(detail, sizeof(detail), "worst relative error %.2e", worst_rel);
  report(3, "PPO gradients match finite differences", worst_rel < 1e-4, detail,
         seconds_since(start), 30.0);
}

// ---- criterion 4: sweep shape on the calibrated environment ----

void criterion_sweep(const SliceConfig& cfg) {
  const auto start = Clock::now();
  std::vector<double> grid;
  for (double a = 500.0; a <= 4000.0; a += 500.0) grid.push_back(a);
  const auto rows = sweep_allocation(cfg, grid, 900, 10, 40001);

  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].mean_reward > rows[best].mean_reward) best = i;
  }
  const double peak_mc = rows[best].allocation_mc;
  const bool peak_in_band = peak_mc >= 1000.0 && peak_mc <= 2000.0;

  int violations = 0;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const bool rising = rows[i + 1].mean_reward > rows[i].mean_reward;
    if (i + 1 <= best && !rising) ++violations;
    if (i >= best && rising) ++violations;
  }
  const bool unimodal = violations <= 1;  // one grid cell of tolerance

  std::ostringstream detail;
  detail << "peak at " << peak_mc << " mc, rewards";
  for (const SweepRow& row : rows) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), " %.3f", row.mean_reward);
    detail << buf;
  }
  report(4, "fixed-allocation reward curve is unimodal with an interior peak",
         peak_in_band && unimodal, detail.str(), seconds_since(start), 120.0);
}

// ---- criterion 5: training convergence ----

void criterion_convergence(const SliceConfig& cfg) {
  const auto start = Clock::now();
  const int episodes = 5;
  const int steps = 900;
  int passing = 0;
  std::ostringstream detail;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    SliceEnv env(cfg);
    const TrainResult result =
        train(env, cfg, PpoHyperparams{}, episodes, steps, seed);
    // the window-100 average is meaningful once the window is full
    std::size_t first_cross = result.reward_curve.size();
    for (std::size_t i = 99; i < result.reward_curve.size(); ++i) {
      if (result.reward_curve[i].moving_avg >= 0.8) {
        first_cross = i;
        break;
      }
    }
    bool stays = first_cross < result.reward_curve.size();
    for (std::size_t i = first_cross; i < result.reward_curve.size(); ++i) {
      if (result.reward_curve[i].moving_avg < 0.75) {
        stays = false;
        break;
      }
    }
    const bool ok = !result.halted &&
                    first_cross < static_cast<std::size_t>(3 * steps) && stays;
    if (ok) ++passing;
    detail << "seed " << seed << (ok ? " ok" : " FAIL") << " (cross at "
           << (first_cross == result.reward_curve.size()
                   ? -1
                   : static_cast<long>(first_cross))
           << "); ";
  }
  report(5, "moving-average reward reaches 0.8 within 3 episodes and holds",
         passing >= 4, detail.str() + std::to_string(passing) + "/5 seeds",
         seconds_since(start), 300.0);
}

// ---- criterion 6: efficiency vs the reference operating point ----

void criterion_efficiency(const SliceConfig& cfg) {
  const auto start = Clock::now();
  const double ref_alloc = 2945.72;
  const double beta_ref = measure_static_beta(cfg, ref_alloc, 10, 900, 50001);
  const bool anchored = std::abs(beta_ref - 0.10) <= 0.03;

  SliceEnv env(cfg);
  const TrainResult trained =
      train(env, cfg, PpoHyperparams{}, 5, 900, 11);

  double alloc_sum = 0.0;
  double beta_sum = 0.0;
  const int eval_seeds = 10;
  for (int s = 0; s < eval_seeds; ++s) {
    RlController ctrl(trained.params, true, 0);
    SliceEnv eval_env(cfg);
    const RunTrace trace = run_episode(eval_env, ctrl, 900, cfg,
                                       split_seed(60001, s), "ppo");
    const MetricsSummary summary = summarize(trace.rows, cfg);
    alloc_sum += summary.mean_allocation_mc;
    beta_sum += summary.beta;
  }
  const double mean_alloc = alloc_sum / eval_seeds;
  const double beta_policy = beta_sum / eval_seeds;
  const bool efficient = mean_alloc <= 0.6 * ref_alloc;
  const bool degradation_held = beta_policy <= beta_ref + 0.05;

  char detail[192];
  std::snprintf(detail, sizeof(detail),
                "beta(ref)=%.3f%s, policy alloc %.1f mc (%.1f%% of ref), "
                "policy beta %.3f",
                beta_ref, anchored ? "" : " OUT OF ANCHOR", mean_alloc,
                100.0 * mean_alloc / ref_alloc, beta_policy);
  report(6, "trained policy stays under 60% CPU at comparable degradation",
         anchored && efficient && degradation_held && !trained.halted, detail,
         seconds_since(start), 300.0);
}

// ---- criterion 7: CLI determinism ----

int run_cli(const std::string& cmd) {
  return std::system((cmd + " > /dev/null 2>&1").c_str());
}

void criterion_determinism(const std::string& cli, const std::string& config) {
  const auto start = Clock::now();
  const fs::path base = fs::temp_directory_path() / "slicerl_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);

  struct Invocation {
    std::string args;
    std::vector<std::string> outputs;
  };
  const std::vector<Invocation> invocations = {
      {" --config " + config + " --seed 5 --steps 400 --out %OUT% eval"
       " --controller threshold",
       {"eval_trace.csv", "summary.txt"}},
      {" --config " + config + " --seed 3 --steps 900 --out %OUT% train"
       " --episodes 1",
       {"train_trace.csv", "reward_curve.csv", "summary.txt",
        "checkpoint.txt"}},
      {" --config " + config + " --seed 2 --steps 200 --out %OUT% sweep"
       " --seeds 2 --grid-min 500 --grid-max 1500 --grid-step 500",
       {"sweep.csv"}},
      {" --seed 9000 --steps 300 --out %OUT% calibrate --seeds 3",
       {"calibrated.cfg"}},
  };

  bool all_ok = true;
  std::string mismatch;
  for (std::size_t i = 0; i < invocations.size(); ++i) {
    const fs::path out_a = base / ("a" + std::to_string(i));
    const fs::path out_b = base / ("b" + std::to_string(i));
    for (const fs::path& out : {out_a, out_b}) {
      std::string cmd = cli + invocations[i].args;
      const std::string token = "%OUT%";
      cmd.replace(cmd.find(token), token.size(), out.string());
      if (run_cli(cmd) != 0) {
        all_ok = false;
        mismatch = "command failed: " + cmd;
      }
    }
    for (const std::string& name : invocations[i].outputs) {
      if (read_file(out_a / name) != read_file(out_b / name)) {
        all_ok = false;
        mismatch = name + " differs between invocations";
      }
    }
  }
  fs::remove_all(base);
  report(7, "repeated subcommands produce byte-identical outputs", all_ok,
         all_ok ? "eval/train/sweep outputs identical" : mismatch,
         seconds_since(start), 60.0);
}

// ---- criterion 8: baseline sanity ----

void criterion_baselines(const SliceConfig& cfg) {
  const auto start = Clock::now();

  SliceEnv env(cfg);
  StaticController fixed(2945.72, cfg);
  const RunTrace trace = run_episode(env, fixed, 900, cfg, 70001, "static");
  // zero variance, checked as bitwise equality of every allocation value
  double variance = 0.0;
  for (const KpiSample& row : trace.rows) {
    const double diff = row.allocation_mc - trace.rows.front().allocation_mc;
    variance += diff * diff;
  }
  const bool static_ok = variance == 0.0;

  ThresholdController threshold(0.8, 0.3, 500.0, cfg);
  bool threshold_ok = true;
  double alloc = 1500.0;
  for (int t = 0; t < 100; ++t) {
    const double next =
        map_action(threshold.act({}, 0.55 * alloc, alloc), cfg);
    if (next != alloc) threshold_ok = false;
    alloc = next;
  }

  ProportionalController proportional(1.2, cfg);
  const double prop_mc =
      map_action(proportional.act(Observation{0.25, 0.0}, 0, 0), cfg);
  const bool prop_ok = std::abs(prop_mc - 1680.0) < 1e-9;

  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "static variance %.1e, threshold held at 1500, "
                "proportional %.6f mc",
                variance, prop_mc);
  report(8, "baseline controllers behave as specified",
         static_ok && threshold_ok && prop_ok, detail, seconds_since(start),
         10.0);
}

// ---- criterion 9: inference latency ----

void criterion_latency() {
  const auto start = Clock::now();
  Rng init(9001);
  const PolicyParameters params = PolicyParameters::init(
      default_net_sizes(), default_net_sizes(), kDefaultLogStdInit, init);
  Rng rng(9002);
  volatile double sink = 0.0;
  const int n = 10000;
  const auto t0 = Clock::now();
  for (int i = 0; i < n; ++i) {
    const Observation obs{rng.uniform01(), rng.uniform01()};
    const ActionSample s = sample_action(params, obs, rng);
    sink = sink + s.action.value;
  }
  const double mean_ms = seconds_since(t0) * 1000.0 / n;
  char detail[96];
  std::snprintf(detail, sizeof(detail), "mean %.4f ms per forward+sample",
                mean_ms);
  report(9, "policy inference under 10 ms per step", mean_ms < 10.0, detail,
         seconds_since(start), 120.0);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  std::string config_path;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--cli") cli = argv[i + 1];
    if (key == "--config") config_path = argv[i + 1];
  }
  if (cli.empty() || config_path.empty()) {
    std::cerr << "usage: acceptance --cli <slicerl binary> --config "
                 "<calibrated config>\n";
    return 2;
  }

  SliceConfig calibrated;
  try {
    calibrated = SliceConfig::from_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "cannot load calibrated config: " << e.what() << '\n';
    return 2;
  }

  criterion_reward();
  criterion_beta();
  criterion_gradients();
  criterion_sweep(calibrated);
  criterion_convergence(calibrated);
  criterion_efficiency(calibrated);
  criterion_determinism(cli, config_path);
  criterion_baselines(calibrated);
  criterion_latency();

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
