#include "slicerl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace slicerl {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5*ln(2*pi)

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp: need >= 2 layers");
  for (int n : sizes) {
    if (n < 1) throw std::invalid_argument("Mlp: layer width must be >= 1");
  }
  if (sizes.back() != 1) {
    throw std::invalid_argument("Mlp: scalar output expected");
  }
}

// Orthonormalize a random Gaussian matrix with modified Gram-Schmidt along
// the shorter dimension, then scale by gain.
std::vector<double> orthogonal_matrix(int rows, int cols, double gain,
                                      Rng& rng) {
  std::vector<double> m(static_cast<std::size_t>(rows) * cols);
  for (double& v : m) v = rng.normal();

  const bool by_cols = rows >= cols;
  const int vecs = by_cols ? cols : rows;
  const int dim = by_cols ? rows : cols;
  auto at = [&](int vec, int k) -> double& {
    return by_cols ? m[static_cast<std::size_t>(k) * cols + vec]
                   : m[static_cast<std::size_t>(vec) * cols + k];
  };
  for (int v = 0; v < vecs; ++v) {
    for (int prev = 0; prev < v; ++prev) {
      double dot = 0.0;
      for (int k = 0; k < dim; ++k) dot += at(v, k) * at(prev, k);
      for (int k = 0; k < dim; ++k) at(v, k) -= dot * at(prev, k);
    }
    double norm = 0.0;
    for (int k = 0; k < dim; ++k) norm += at(v, k) * at(v, k);
    norm = std::sqrt(std::max(norm, 1e-300));
    for (int k = 0; k < dim; ++k) at(v, k) /= norm;
  }
  for (double& v : m) v *= gain;
  return m;
}

void init_mlp(Mlp& net, double head_gain, Rng& rng) {
  const int layers = net.layer_count();
  for (int l = 0; l < layers; ++l) {
    const double gain = (l == layers - 1) ? head_gain : std::numbers::sqrt2;
    net.weights[l] =
        orthogonal_matrix(net.sizes[l + 1], net.sizes[l], gain, rng);
    std::fill(net.biases[l].begin(), net.biases[l].end(), 0.0);
  }
}

bool all_finite(const Mlp& net) {
  for (const auto& w : net.weights) {
    for (double v : w) {
      if (!std::isfinite(v)) return false;
    }
  }
  for (const auto& b : net.biases) {
    for (double v : b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void append_pointers(Mlp& net, std::vector<double*>& out) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (double& v : net.weights[l]) out.push_back(&v);
    for (double& v : net.biases[l]) out.push_back(&v);
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Mlp Mlp::zeros(const std::vector<int>& sizes) {
  check_sizes(sizes);
  Mlp net;
  net.sizes = sizes;
  net.weights.resize(sizes.size() - 1);
  net.biases.resize(sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    net.weights[l].assign(
        static_cast<std::size_t>(sizes[l + 1]) * sizes[l], 0.0);
    net.biases[l].assign(static_cast<std::size_t>(sizes[l + 1]), 0.0);
  }
  return net;
}

double mlp_forward(const Mlp& net, std::span<const double> input,
                   MlpTape* tape) {
  if (static_cast<int>(input.size()) != net.sizes.front()) {
    throw std::invalid_argument("mlp_forward: input width mismatch");
  }
  std::vector<double> cur(input.begin(), input.end());
  if (tape) {
    tape->act.clear();
    tape->act.push_back(cur);
  }
  const int layers = net.layer_count();
  for (int l = 0; l < layers; ++l) {
    const int rows = net.sizes[l + 1];
    const int cols = net.sizes[l];
    std::vector<double> next(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
      double acc = net.biases[l][r];
      const double* wrow = net.weights[l].data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) acc += wrow[c] * cur[c];
      next[r] = (l == layers - 1) ? acc : std::tanh(acc);
    }
    cur = std::move(next);
    if (tape) tape->act.push_back(cur);
  }
  return cur[0];
}

void mlp_backward(const Mlp& net, const MlpTape& tape, double dloss_dout,
                  Mlp& grad) {
  const int layers = net.layer_count();
  std::vector<double> delta{dloss_dout};
  for (int l = layers - 1; l >= 0; --l) {
    const int rows = net.sizes[l + 1];
    const int cols = net.sizes[l];
    const std::vector<double>& below = tape.act[static_cast<std::size_t>(l)];
    for (int r = 0; r < rows; ++r) {
      const double d = delta[r];
      double* gw = grad.weights[l].data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) gw[c] += d * below[c];
      grad.biases[l][r] += d;
    }
    if (l == 0) break;
    std::vector<double> prev(static_cast<std::size_t>(cols), 0.0);
    for (int r = 0; r < rows; ++r) {
      const double d = delta[r];
      const double* wrow = net.weights[l].data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) prev[c] += wrow[c] * d;
    }
    // tanh'(z) = 1 - a^2 on the post-activation cache
    for (int c = 0; c < cols; ++c) prev[c] *= 1.0 - below[c] * below[c];
    delta = std::move(prev);
  }
}

PolicyParameters PolicyParameters::init(const std::vector<int>& policy_sizes,
                                        const std::vector<int>& value_sizes,
                                        double log_std_init, Rng& rng) {
  PolicyParameters p;
  p.policy = Mlp::zeros(policy_sizes);
  p.value = Mlp::zeros(value_sizes);
  init_mlp(p.policy, 0.01, rng);
  init_mlp(p.value, 1.0, rng);
  p.log_std = std::clamp(log_std_init, kLogStdMin, kLogStdMax);
  return p;
}

bool PolicyParameters::finite() const {
  return std::isfinite(log_std) && all_finite(policy) && all_finite(value);
}

std::vector<int> default_net_sizes() { return {2, 64, 64, 1}; }

PolicyParameters zeros_like(const PolicyParameters& shape) {
  PolicyParameters z;
  z.policy = Mlp::zeros(shape.policy.sizes);
  z.value = Mlp::zeros(shape.value.sizes);
  z.log_std = 0.0;
  return z;
}

std::vector<double*> param_pointers(PolicyParameters& p) {
  std::vector<double*> out;
  append_pointers(p.policy, out);
  out.push_back(&p.log_std);
  append_pointers(p.value, out);
  return out;
}

std::vector<const double*> param_pointers(const PolicyParameters& p) {
  auto mut = param_pointers(const_cast<PolicyParameters&>(p));
  return {mut.begin(), mut.end()};
}

void PpoHyperparams::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("require gamma in (0,1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw ConfigError("require gae_lambda in [0,1]");
  if (!(clip_eps > 0.0)) throw ConfigError("require clip_eps > 0");
  if (!(learning_rate >= 0.0)) throw ConfigError("require learning_rate >= 0");
  if (rollout_len < 1) throw ConfigError("require rollout_len >= 1");
  if (epochs_per_update < 1) throw ConfigError("require epochs_per_update >= 1");
  if (minibatch_size < 1) throw ConfigError("require minibatch_size >= 1");
  if (!(value_coef >= 0.0)) throw ConfigError("require value_coef >= 0");
  if (!(entropy_coef >= 0.0)) throw ConfigError("require entropy_coef >= 0");
  if (!(max_grad_norm > 0.0)) throw ConfigError("require max_grad_norm > 0");
}

PolicyOutput policy_forward(const PolicyParameters& params,
                            const Observation& obs) {
  if (!params.finite()) {
    throw FaultError("policy_forward: non-finite parameters");
  }
  const double input[2] = {obs.traffic_norm, obs.cpu_usage_norm};
  PolicyOutput out;
  out.mean = mlp_forward(params.policy, input);
  out.log_std = params.log_std;
  out.value = mlp_forward(params.value, input);
  return out;
}

ActionSample sample_action(const PolicyParameters& params,
                           const Observation& obs, Rng& rng) {
  const PolicyOutput fwd = policy_forward(params, obs);
  ActionSample s;
  s.raw = fwd.mean + std::exp(fwd.log_std) * rng.normal();
  s.action.value = std::clamp(s.raw, 0.0, 1.0);
  s.log_prob = gaussian_log_prob(s.raw, fwd.mean, fwd.log_std);
  return s;
}

double gaussian_log_prob(double x, double mean, double log_std) {
  const double z = (x - mean) / std::exp(log_std);
  return -0.5 * z * z - log_std - kHalfLog2Pi;
}

double gaussian_entropy(double log_std) {
  return 0.5 + kHalfLog2Pi + log_std;
}

GaeResult compute_gae(const TrajectoryBuffer& buffer, const PpoHyperparams& hp,
                      double bootstrap_value) {
  if (buffer.empty()) throw std::invalid_argument("compute_gae: empty buffer");
  const std::size_t n = buffer.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);

  double carry = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const Transition& tr = buffer[i];
    const double not_done = tr.done ? 0.0 : 1.0;
    const double next_value =
        (i + 1 < n) ? buffer[i + 1].value : bootstrap_value;
    const double delta =
        tr.reward + hp.gamma * next_value * not_done - tr.value;
    carry = delta + hp.gamma * hp.gae_lambda * not_done * carry;
    out.advantages[i] = carry;
    out.returns[i] = carry + tr.value;
  }

  double mean = 0.0;
  for (double a : out.advantages) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : out.advantages) var += (a - mean) * (a - mean);
  const double stddev = std::sqrt(var / static_cast<double>(n));
  if (stddev >= 1e-8) {
    for (double& a : out.advantages) a = (a - mean) / stddev;
  }
  return out;
}

PpoLoss ppo_loss(const PolicyParameters& params,
                 std::span<const Transition> batch,
                 std::span<const double> advantages,
                 std::span<const double> returns, const PpoHyperparams& hp) {
  if (batch.empty() || batch.size() != advantages.size() ||
      batch.size() != returns.size()) {
    throw std::invalid_argument("ppo_loss: batch/advantage/return mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const double sigma = std::exp(params.log_std);

  PpoLoss out;
  out.gradients = zeros_like(params);

  MlpTape policy_tape;
  MlpTape value_tape;
  double policy_sum = 0.0;
  double value_sum = 0.0;

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& tr = batch[i];
    const double input[2] = {tr.state.traffic_norm, tr.state.cpu_usage_norm};
    const double mean = mlp_forward(params.policy, input, &policy_tape);
    const double value = mlp_forward(params.value, input, &value_tape);

    const double z = (tr.raw_action - mean) / sigma;
    const double new_log_prob = -0.5 * z * z - params.log_std - kHalfLog2Pi;
    const double ratio = std::exp(new_log_prob - tr.log_prob);
    const double adv = advantages[i];
    const double surr = ratio * adv;
    const double surr_clipped =
        std::clamp(ratio, 1.0 - hp.clip_eps, 1.0 + hp.clip_eps) * adv;
    const double v_diff = value - returns[i];

    if (!std::isfinite(ratio) || !std::isfinite(surr) ||
        !std::isfinite(v_diff)) {
      throw FaultError("ppo_loss: non-finite loss at sample " +
                       std::to_string(i));
    }

    policy_sum += std::min(surr, surr_clipped);
    value_sum += v_diff * v_diff;

    // The clipped branch is constant in the parameters, so gradient flows
    // only when the unclipped surrogate is the active minimum.
    double dloss_dlogp = 0.0;
    if (surr <= surr_clipped) dloss_dlogp = -surr * inv_n;
    const double dloss_dmean = dloss_dlogp * (z / sigma);
    const double dloss_dlogstd_sample = dloss_dlogp * (z * z - 1.0);

    mlp_backward(params.policy, policy_tape, dloss_dmean,
                 out.gradients.policy);
    out.gradients.log_std += dloss_dlogstd_sample;

    const double dloss_dvalue = hp.value_coef * 2.0 * v_diff * inv_n;
    mlp_backward(params.value, value_tape, dloss_dvalue, out.gradients.value);
  }

  out.policy_term = -policy_sum * inv_n;
  out.value_term = hp.value_coef * value_sum * inv_n;
  out.entropy_term = -hp.entropy_coef * gaussian_entropy(params.log_std);
  out.gradients.log_std += -hp.entropy_coef;
  out.total = out.policy_term + out.value_term + out.entropy_term;
  if (!std::isfinite(out.total)) {
    throw FaultError("ppo_loss: non-finite total loss");
  }
  return out;
}

PpoUpdater::PpoUpdater(PpoHyperparams hp, uint64_t seed)
    : hp_(hp), rng_(seed) {
  hp_.validate();
}

void PpoUpdater::adam_step(PolicyParameters& params,
                           const PolicyParameters& grad) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++step_count_;
  const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_count_));
  const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_count_));

  auto p = param_pointers(params);
  auto g = param_pointers(const_cast<PolicyParameters&>(grad));
  auto m = param_pointers(moment1_);
  auto v = param_pointers(moment2_);
  for (std::size_t i = 0; i < p.size(); ++i) {
    *m[i] = kBeta1 * *m[i] + (1.0 - kBeta1) * *g[i];
    *v[i] = kBeta2 * *v[i] + (1.0 - kBeta2) * *g[i] * *g[i];
    const double m_hat = *m[i] / bias1;
    const double v_hat = *v[i] / bias2;
    *p[i] -= hp_.learning_rate * m_hat / (std::sqrt(v_hat) + kEps);
  }
  params.log_std = std::clamp(params.log_std, kLogStdMin, kLogStdMax);
  if (!params.finite()) {
    throw FaultError("update: non-finite parameter after optimizer step");
  }
}

PolicyParameters PpoUpdater::update(const PolicyParameters& params,
                                    const TrajectoryBuffer& buffer,
                                    double bootstrap_value) {
  if (static_cast<int>(buffer.size()) != hp_.rollout_len) {
    throw std::invalid_argument("update: buffer length != rollout_len");
  }
  if (!moments_ready_) {
    moment1_ = zeros_like(params);
    moment2_ = zeros_like(params);
    moments_ready_ = true;
  }

  const GaeResult gae = compute_gae(buffer, hp_, bootstrap_value);
  PolicyParameters next = params;

  std::vector<std::size_t> order(buffer.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<Transition> mb_batch;
  std::vector<double> mb_adv;
  std::vector<double> mb_ret;

  for (int epoch = 0; epoch < hp_.epochs_per_update; ++epoch) {
    // Fisher-Yates with the owned stream; std::shuffle is avoided because
    // its sequence is implementation-defined.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = rng_.next_u64() % i;
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(hp_.minibatch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(hp_.minibatch_size));
      mb_batch.clear();
      mb_adv.clear();
      mb_ret.clear();
      for (std::size_t k = start; k < end; ++k) {
        mb_batch.push_back(buffer[order[k]]);
        mb_adv.push_back(gae.advantages[order[k]]);
        mb_ret.push_back(gae.returns[order[k]]);
      }
      PpoLoss loss = ppo_loss(next, mb_batch, mb_adv, mb_ret, hp_);

      auto g = param_pointers(loss.gradients);
      double norm_sq = 0.0;
      for (const double* gi : g) norm_sq += *gi * *gi;
      const double norm = std::sqrt(norm_sq);
      if (norm > hp_.max_grad_norm) {
        const double scale = hp_.max_grad_norm / norm;
        for (double* gi : g) *gi *= scale;
      }
      adam_step(next, loss.gradients);
    }
  }
  return next;
}

void save_checkpoint(const PolicyParameters& params, const PpoHyperparams& hp,
                     const std::filesystem::path& path) {
  if (!params.finite()) {
    throw FaultError("save_checkpoint: non-finite parameters");
  }
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path.string());
  out << "slicerl_checkpoint v1\n";
  out << "policy_sizes";
  for (int n : params.policy.sizes) out << ' ' << n;
  out << "\nvalue_sizes";
  for (int n : params.value.sizes) out << ' ' << n;
  out << "\nhyperparams " << fmt17(hp.learning_rate) << ' ' << fmt17(hp.gamma)
      << ' ' << hp.rollout_len << ' ' << fmt17(hp.gae_lambda) << ' '
      << fmt17(hp.clip_eps) << ' ' << hp.epochs_per_update << ' '
      << hp.minibatch_size << ' ' << fmt17(hp.value_coef) << ' '
      << fmt17(hp.entropy_coef) << ' ' << fmt17(hp.max_grad_norm) << '\n';
  const auto ptrs = param_pointers(params);
  out << "params " << ptrs.size() << '\n';
  for (const double* p : ptrs) out << fmt17(*p) << '\n';
  if (!out) throw CheckpointError("short write: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
  std::string magic;
  std::string version;
  in >> magic >> version;
  if (magic != "slicerl_checkpoint" || version != "v1") {
    throw CheckpointError("unrecognized checkpoint header: " + path.string());
  }

  auto read_sizes = [&](const std::string& tag) {
    std::string key;
    in >> key;
    if (key != tag) throw CheckpointError("expected '" + tag + "' section");
    std::vector<int> sizes;
    // widths until the next non-numeric token
    while (true) {
      const auto pos = in.tellg();
      std::string tok;
      if (!(in >> tok)) throw CheckpointError("truncated checkpoint");
      char* end = nullptr;
      const long v = std::strtol(tok.c_str(), &end, 10);
      if (end != tok.c_str() + tok.size()) {
        in.seekg(pos);
        break;
      }
      sizes.push_back(static_cast<int>(v));
    }
    return sizes;
  };

  Checkpoint ck;
  const std::vector<int> policy_sizes = read_sizes("policy_sizes");
  const std::vector<int> value_sizes = read_sizes("value_sizes");
  if (policy_sizes.size() < 2 || value_sizes.size() < 2 ||
      policy_sizes.front() != 2 || value_sizes.front() != 2 ||
      policy_sizes.back() != 1 || value_sizes.back() != 1) {
    throw CheckpointError("checkpoint shape mismatch");
  }

  std::string key;
  in >> key;
  if (key != "hyperparams") throw CheckpointError("expected 'hyperparams'");
  in >> ck.hp.learning_rate >> ck.hp.gamma >> ck.hp.rollout_len >>
      ck.hp.gae_lambda >> ck.hp.clip_eps >> ck.hp.epochs_per_update >>
      ck.hp.minibatch_size >> ck.hp.value_coef >> ck.hp.entropy_coef >>
      ck.hp.max_grad_norm;
  if (!in) throw CheckpointError("malformed hyperparameters");

  ck.params.policy = Mlp::zeros(policy_sizes);
  ck.params.value = Mlp::zeros(value_sizes);
  std::size_t count = 0;
  in >> key >> count;
  if (key != "params") throw CheckpointError("expected 'params'");
  auto ptrs = param_pointers(ck.params);
  if (count != ptrs.size()) throw CheckpointError("checkpoint shape mismatch");
  for (double* p : ptrs) {
    if (!(in >> *p)) throw CheckpointError("truncated parameter block");
  }
  if (!ck.params.finite() || ck.params.log_std < kLogStdMin ||
      ck.params.log_std > kLogStdMax) {
    throw CheckpointError("checkpoint parameters out of range");
  }
  ck.hp.validate();
  return ck;
}

}  // namespace slicerl
