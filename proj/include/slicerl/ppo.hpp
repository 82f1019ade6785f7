#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slicerl/core.hpp"
#include "slicerl/rng.hpp"

namespace slicerl {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense MLP with tanh hidden units and a linear scalar output. Weights are
// row-major: weights[l][r * sizes[l] + c] connects input c to output r.
struct Mlp {
  std::vector<int> sizes;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static Mlp zeros(const std::vector<int>& sizes);
  int layer_count() const { return static_cast<int>(sizes.size()) - 1; }
};

// Activation cache from a forward pass, consumed by mlp_backward.
struct MlpTape {
  std::vector<std::vector<double>> act;  // act[0] = input, act[l] post-tanh
};

double mlp_forward(const Mlp& net, std::span<const double> input,
                   MlpTape* tape = nullptr);

// Accumulates dL/dparams into grad for a scalar output derivative.
void mlp_backward(const Mlp& net, const MlpTape& tape, double dloss_dout,
                  Mlp& grad);

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;

// Policy mean network, state-independent log-std, and value network. Also
// reused as the container for gradients and optimizer moments since those
// share the parameter layout.
struct PolicyParameters {
  Mlp policy;
  double log_std = 0.0;
  Mlp value;

  // Orthogonal init scaled by sqrt(2) for hidden layers; the mean head uses
  // gain 0.01 and the value head gain 1 so early actions stay near zero.
  static PolicyParameters init(const std::vector<int>& policy_sizes,
                               const std::vector<int>& value_sizes,
                               double log_std_init, Rng& rng);

  bool finite() const;
};

std::vector<int> default_net_sizes();  // {2, 64, 64, 1}

// Exploration scale at init (sigma ~ 0.105). The optimizer moves log_std by
// at most ~learning_rate per step, so the starting value has to leave the
// reward within reach of the convergence band on its own.
constexpr double kDefaultLogStdInit = -2.25;

PolicyParameters zeros_like(const PolicyParameters& shape);

// Every scalar parameter in a fixed order (policy layers, log_std, value
// layers); used by the optimizer, norm clipping, checkpoints and tests.
std::vector<double*> param_pointers(PolicyParameters& p);
std::vector<const double*> param_pointers(const PolicyParameters& p);

struct PpoHyperparams {
  double learning_rate = 3e-4;
  double gamma = 0.99;
  int rollout_len = 32;
  // Actions only move the immediate reward here (traffic is exogenous), so
  // long GAE horizons bury the policy signal in downstream TD noise;
  // lambda = 0.5 keeps training stable at the 32-step update cadence.
  double gae_lambda = 0.5;
  double clip_eps = 0.2;
  int epochs_per_update = 10;
  int minibatch_size = 32;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;

  void validate() const;  // throws ConfigError
};

struct Transition {
  Observation state;
  NormalizedAction action;  // post-clamp, applied to the environment
  double raw_action = 0.0;  // pre-clamp Gaussian sample
  double log_prob = 0.0;    // density at raw_action
  double value = 0.0;       // V(state) at collection time
  double reward = 0.0;
  Observation next_state;
  bool done = false;
};

using TrajectoryBuffer = std::vector<Transition>;

struct PolicyOutput {
  double mean = 0.0;
  double log_std = 0.0;
  double value = 0.0;
};

// Deterministic forward pass of both heads; faults on non-finite parameters.
PolicyOutput policy_forward(const PolicyParameters& params,
                            const Observation& obs);

struct ActionSample {
  NormalizedAction action;
  double raw = 0.0;
  double log_prob = 0.0;
};

// raw ~ Normal(mean, exp(log_std)); action = clamp(raw, 0, 1); log_prob is
// the Gaussian log-density at the pre-clamp sample.
ActionSample sample_action(const PolicyParameters& params,
                           const Observation& obs, Rng& rng);

double gaussian_log_prob(double x, double mean, double log_std);
double gaussian_entropy(double log_std);

struct GaeResult {
  std::vector<double> advantages;  // normalized to zero mean, unit variance
  std::vector<double> returns;     // raw advantage + V(s)
};

GaeResult compute_gae(const TrajectoryBuffer& buffer, const PpoHyperparams& hp,
                      double bootstrap_value);

struct PpoLoss {
  double total = 0.0;
  double policy_term = 0.0;
  double value_term = 0.0;
  double entropy_term = 0.0;
  PolicyParameters gradients;
};

// Clipped surrogate + value MSE + entropy bonus with exact analytic
// gradients for every parameter. Faults on a non-finite per-sample loss,
// naming the offending sample.
PpoLoss ppo_loss(const PolicyParameters& params,
                 std::span<const Transition> batch,
                 std::span<const double> advantages,
                 std::span<const double> returns, const PpoHyperparams& hp);

// Adam over all parameters with global gradient-norm clipping. Owns the
// optimizer moments and the minibatch shuffle stream; updates are
// deterministic for a fixed seed.
class PpoUpdater {
 public:
  PpoUpdater(PpoHyperparams hp, uint64_t seed);

  // Runs epochs_per_update passes over shuffled minibatches and returns the
  // new parameters. Throws FaultError if any parameter turns non-finite;
  // the caller's parameters are untouched in that case.
  PolicyParameters update(const PolicyParameters& params,
                          const TrajectoryBuffer& buffer,
                          double bootstrap_value);

  const PpoHyperparams& hyperparams() const { return hp_; }

 private:
  void adam_step(PolicyParameters& params, const PolicyParameters& grad);

  PpoHyperparams hp_;
  Rng rng_;
  PolicyParameters moment1_;
  PolicyParameters moment2_;
  bool moments_ready_ = false;
  long step_count_ = 0;
};

// Versioned text checkpoint: layer shapes, hyperparameters, then all
// parameters with 17 significant digits so save/load round-trips bit-exact.
void save_checkpoint(const PolicyParameters& params, const PpoHyperparams& hp,
                     const std::filesystem::path& path);

struct Checkpoint {
  PolicyParameters params;
  PpoHyperparams hp;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace slicerl
