#include "slicerl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <sstream>
#include <thread>

namespace slicerl {

namespace {

constexpr const char* kTraceHeader =
    "step,active_users,cpu_usage_mc,throughput_mbps,allocation_mc,reward";

double applied_normalized(const KpiSample& kpi, const SliceConfig& cfg) {
  return std::clamp(kpi.allocation_mc / cfg.load_norm_max_mc, 0.0, 1.0);
}

double step_reward(const KpiSample& kpi, const SliceConfig& cfg) {
  const double action = applied_normalized(kpi, cfg);
  const double load = load_estimate(kpi.active_users, cfg).value;
  const double a[1] = {action};
  const double d[1] = {load};
  return round6(reward(a, d));
}

double parse_csv_double(const std::string& field, std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != field.size() || field.empty()) {
    throw ParseError("invalid numeric field '" + field + "'", line);
  }
  return v;
}

long parse_csv_long(const std::string& field, std::size_t line) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(field, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != field.size() || field.empty()) {
    throw ParseError("invalid integer field '" + field + "'", line);
  }
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Running window average used for the reward-vs-time curve.
class MovingAverage {
 public:
  explicit MovingAverage(std::size_t window) : window_(window) {}
  double push(double v) {
    values_.push_back(v);
    sum_ += v;
    if (values_.size() > window_) {
      sum_ -= values_.front();
      values_.pop_front();
    }
    return sum_ / static_cast<double>(values_.size());
  }

 private:
  std::size_t window_;
  std::deque<double> values_;
  double sum_ = 0.0;
};

}  // namespace

RunTrace run_episode(EnvInterface& env, ControllerInterface& ctrl, int steps,
                     const SliceConfig& cfg, uint64_t seed,
                     const std::string& controller_id) {
  if (steps < 1) throw std::invalid_argument("run_episode: steps >= 1");
  RunTrace trace;
  trace.meta.seed = seed;
  trace.meta.config_hash = cfg.hash();
  trace.meta.controller_id = controller_id;
  trace.meta.episodes = 1;
  trace.rows.reserve(static_cast<std::size_t>(steps));

  Observation obs = env.reset(seed);
  double last_usage_mc = 0.0;
  double last_alloc_mc = cfg.cpu_min_mc;
  try {
    for (int t = 0; t < steps; ++t) {
      const NormalizedAction action = ctrl.act(obs, last_usage_mc, last_alloc_mc);
      const double alloc_mc = round6(map_action(action, cfg));
      env.apply_cpu_limit(alloc_mc);
      auto [next_obs, kpi] = env.step();
      kpi.reward = step_reward(kpi, cfg);
      trace.rows.push_back(kpi);
      last_usage_mc = kpi.cpu_usage_mc;
      last_alloc_mc = kpi.allocation_mc;
      obs = next_obs;
    }
  } catch (const std::exception& e) {
    trace.meta.incomplete_cause = e.what();
  }
  return trace;
}

TrainResult train(EnvInterface& env, const SliceConfig& cfg,
                  const PpoHyperparams& hp, int episodes,
                  int steps_per_episode, uint64_t seed,
                  const PolicyParameters* initial_params) {
  if (episodes < 1) throw std::invalid_argument("train: episodes >= 1");
  if (steps_per_episode < 1) throw std::invalid_argument("train: steps >= 1");
  hp.validate();

  Rng init_rng(split_seed(seed, 1));
  Rng action_rng(split_seed(seed, 2));
  PpoUpdater updater(hp, split_seed(seed, 3));

  TrainResult result;
  result.params = initial_params != nullptr
                      ? *initial_params
                      : PolicyParameters::init(default_net_sizes(),
                                               default_net_sizes(),
                                               kDefaultLogStdInit, init_rng);
  result.trace.meta.seed = seed;
  result.trace.meta.config_hash = cfg.hash();
  result.trace.meta.controller_id = "ppo";
  result.trace.meta.episodes = episodes;
  result.trace.rows.reserve(
      static_cast<std::size_t>(episodes) * steps_per_episode);

  MovingAverage window(kRewardWindow);
  Observation obs = env.reset(split_seed(seed, 0));
  TrajectoryBuffer buffer;
  buffer.reserve(static_cast<std::size_t>(hp.rollout_len));

  for (int ep = 0; ep < episodes && !result.halted; ++ep) {
    buffer.clear();
    for (int t = 0; t < steps_per_episode; ++t) {
      const PolicyOutput fwd = policy_forward(result.params, obs);
      Transition tr;
      tr.state = obs;
      tr.raw_action = fwd.mean + std::exp(fwd.log_std) * action_rng.normal();
      tr.action.value = std::clamp(tr.raw_action, 0.0, 1.0);
      tr.log_prob = gaussian_log_prob(tr.raw_action, fwd.mean, fwd.log_std);
      tr.value = fwd.value;

      const double alloc_mc = round6(map_action(tr.action, cfg));
      env.apply_cpu_limit(alloc_mc);
      auto [next_obs, kpi] = env.step();
      kpi.reward = step_reward(kpi, cfg);
      tr.reward = *kpi.reward;
      tr.next_state = next_obs;
      tr.done = false;

      result.trace.rows.push_back(kpi);
      result.reward_curve.push_back(
          RewardPoint{tr.reward, window.push(tr.reward)});
      buffer.push_back(tr);
      obs = next_obs;

      if (static_cast<int>(buffer.size()) == hp.rollout_len) {
        const double bootstrap = policy_forward(result.params, obs).value;
        try {
          result.params = updater.update(result.params, buffer, bootstrap);
        } catch (const FaultError& e) {
          result.halted = true;
          result.halt_cause = e.what();
          result.trace.meta.incomplete_cause = e.what();
          break;
        }
        buffer.clear();
      }
    }
  }
  return result;
}

PolicyParameters warmstart_from_trace(const PolicyParameters& params,
                                      PpoUpdater& updater,
                                      const RunTrace& trace,
                                      const SliceConfig& cfg) {
  const int rollout = updater.hyperparams().rollout_len;
  PolicyParameters current = params;
  TrajectoryBuffer buffer;
  buffer.reserve(static_cast<std::size_t>(rollout));
  double prev_usage_mc = 0.0;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const KpiSample& row = trace.rows[i];
    Transition tr;
    tr.state = normalize_observation(row.active_users, prev_usage_mc, cfg);
    tr.action.value =
        std::clamp(row.allocation_mc / cfg.load_norm_max_mc, 0.0, 1.0);
    tr.raw_action = tr.action.value;
    const PolicyOutput fwd = policy_forward(current, tr.state);
    tr.log_prob = gaussian_log_prob(tr.raw_action, fwd.mean, fwd.log_std);
    tr.value = fwd.value;
    tr.reward = row.reward.value_or(0.0);
    const int next_users =
        i + 1 < trace.rows.size() ? trace.rows[i + 1].active_users : 0;
    tr.next_state =
        normalize_observation(next_users, row.cpu_usage_mc, cfg);
    tr.done = false;
    buffer.push_back(tr);
    prev_usage_mc = row.cpu_usage_mc;

    if (static_cast<int>(buffer.size()) == rollout) {
      const double bootstrap = policy_forward(current, tr.next_state).value;
      current = updater.update(current, buffer, bootstrap);
      buffer.clear();
    }
  }
  return current;
}

std::vector<SweepRow> sweep_allocation(const SliceConfig& cfg,
                                       std::span<const double> grid, int steps,
                                       int seeds, uint64_t base_seed) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  if (seeds < 1) throw std::invalid_argument("sweep: seeds >= 1");
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  SliceEnv env(cfg);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    StaticController ctrl(grid[g], cfg);
    SweepRow row;
    row.allocation_mc = grid[g];
    for (int s = 0; s < seeds; ++s) {
      const uint64_t seed = split_seed(split_seed(base_seed, g), s);
      const RunTrace trace =
          run_episode(env, ctrl, steps, cfg, seed, "static");
      const MetricsSummary summary = summarize(trace.rows, cfg);
      row.mean_reward += summary.mean_reward;
      row.beta += summary.beta;
      row.sla_fraction += summary.sla_fraction;
    }
    row.mean_reward /= seeds;
    row.beta /= seeds;
    row.sla_fraction /= seeds;
    rows.push_back(row);
  }
  return rows;
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "# seed=%llu\n",
                static_cast<unsigned long long>(trace.meta.seed));
  out << buf;
  std::snprintf(buf, sizeof(buf), "# config_hash=%016llx\n",
                static_cast<unsigned long long>(trace.meta.config_hash));
  out << buf;
  out << "# controller=" << trace.meta.controller_id << '\n';
  out << "# episodes=" << trace.meta.episodes << '\n';
  if (!trace.meta.incomplete_cause.empty()) {
    out << "# incomplete=" << trace.meta.incomplete_cause << '\n';
  }
  out << kTraceHeader << '\n';
  for (const KpiSample& row : trace.rows) {
    if (!row.reward.has_value()) {
      throw std::logic_error("write_trace_csv: unset reward");
    }
    std::snprintf(buf, sizeof(buf), "%ld,%d,%.6f,%.6f,%.6f,%.6f\n", row.step,
                  row.active_users, row.cpu_usage_mc, row.throughput_mbps,
                  row.allocation_mc, *row.reward);
    out << buf;
  }
}

void write_trace_csv(const RunTrace& trace,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path.string());
  write_trace_csv(trace, out);
}

RunTrace read_trace_csv(std::istream& in) {
  RunTrace trace;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "seed") {
        trace.meta.seed = std::strtoull(value.c_str(), nullptr, 10);
      } else if (key == "config_hash") {
        trace.meta.config_hash = std::strtoull(value.c_str(), nullptr, 16);
      } else if (key == "controller") {
        trace.meta.controller_id = value;
      } else if (key == "episodes") {
        trace.meta.episodes = static_cast<int>(parse_csv_long(value, line_no));
      } else if (key == "incomplete") {
        trace.meta.incomplete_cause = value;
      }
      continue;
    }
    if (!header_seen) {
      if (line != kTraceHeader) {
        throw ParseError("unexpected trace header '" + line + "'", line_no);
      }
      header_seen = true;
      continue;
    }
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 6) {
      throw ParseError("expected 6 fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    KpiSample row;
    row.step = parse_csv_long(fields[0], line_no);
    row.active_users = static_cast<int>(parse_csv_long(fields[1], line_no));
    row.cpu_usage_mc = parse_csv_double(fields[2], line_no);
    row.throughput_mbps = parse_csv_double(fields[3], line_no);
    row.allocation_mc = parse_csv_double(fields[4], line_no);
    row.reward = parse_csv_double(fields[5], line_no);
    trace.rows.push_back(row);
  }
  if (!header_seen) throw ParseError("missing trace header", line_no);
  return trace;
}

RunTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace: " + path.string());
  return read_trace_csv(in);
}

void write_reward_curve_csv(std::span<const RewardPoint> curve,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write curve: " + path.string());
  out << "step,reward,moving_avg\n";
  char buf[96];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", i, curve[i].reward,
                  curve[i].moving_avg);
    out << buf;
  }
}

void write_sweep_csv(std::span<const SweepRow> rows,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sweep: " + path.string());
  out << "allocation_mc,mean_reward,beta,sla_fraction\n";
  char buf[128];
  for (const SweepRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f\n",
                  row.allocation_mc, row.mean_reward, row.beta,
                  row.sla_fraction);
    out << buf;
  }
}

MetricsSummary analyze_trace(const RunTrace& trace, const SliceConfig& cfg) {
  return summarize(trace.rows, cfg);
}

double reward_column_max_error(const RunTrace& trace, const SliceConfig& cfg) {
  double max_err = 0.0;
  for (const KpiSample& row : trace.rows) {
    if (!row.reward.has_value()) continue;
    max_err = std::max(max_err, std::abs(*row.reward - step_reward(row, cfg)));
  }
  return max_err;
}

std::pair<Observation, KpiSample> RealtimePacer::step() {
  std::this_thread::sleep_for(std::chrono::seconds(period_s_));
  return inner_.step();
}

}  // namespace slicerl
