#pragma once

#include "polyc/lyapunov/critic.hpp"
#include "polyc/policy/ppo.hpp"

#include <functional>
#include <string>
#include <vector>

namespace polyc::policy {

struct PolycConfig {
  double gamma = 0.99;
  double lambda_gae = 0.95;
  double beta = 0.5;
  double clip_eps = 0.2;
  double entropy_coef = 0.0;
  int epochs_per_iter = 10;
  std::size_t minibatch_size = 64;
  std::size_t steps_per_iter = 2048;
  int total_iters = 300;
  bool beta_lagrange = false;
  double alpha_beta = 0.01;
  bool normalize_advantages = true;
  double policy_lr = 3e-4;
  double value_lr = 3e-4;
  std::vector<int> hidden{64, 64};
  nn::Activation activation = nn::Activation::tanh;
  double init_log_std = -0.5;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  nlohmann::json to_json() const;
  static PolycConfig from_json(const nlohmann::json& j);
};

struct CriticConfig {
  std::size_t batch_size = 256;
  int minibatches = 20;
  double lr = 1e-3;
  lyapunov::LieResample lie_resample = lyapunov::LieResample::mean_action;
  double margin = 0.0;
  bool persist_buffer = false;
  std::size_t persist_capacity = 20000;
  std::vector<int> hidden{64, 64};
  nn::Activation activation = nn::Activation::tanh;

  void validate() const;
  nlohmann::json to_json() const;
  static CriticConfig from_json(const nlohmann::json& j);
};

struct IterationMetrics {
  int iter = 0;
  double mean_return = 0.0;
  double lyapunov_risk = 0.0;
  double mean_lie = 0.0;
  double clip_frac = 0.0;
  double beta = 0.0;
  double entropy = 0.0;
};

/// Column header of the metrics CSV.
std::string metrics_csv_header();
std::string metrics_csv_row(const IterationMetrics& m);

struct Agent {
  nn::GaussianPolicy policy;
  nn::Mlp value_net;
  lyapunov::LyapunovCritic critic;
  double beta = 0.0;
  int iter = 0;
};

/// Freshly initialized networks, drawn from `rng` in a fixed order.
Agent init_agent(const envs::Env& env, const PolycConfig& cfg, const CriticConfig& critic_cfg, Rng& rng);

struct TrainHooks {
  /// Called after every outer iteration with the current agent.
  std::function<void(const Agent&, const IterationMetrics&)> on_iteration;
};

struct TrainResult {
  Agent agent;
  std::vector<IterationMetrics> metrics;
};

/**
 * Outer loop: collect on-policy rollouts, fit the Lyapunov critic to the
 * current closed loop, then run clipped policy epochs on the blended
 * advantage and regress the reward value function.
 */
TrainResult polyc_train(const envs::Env& env, const PolycConfig& cfg, const CriticConfig& critic_cfg,
                        std::uint64_t seed, const TrainHooks& hooks = {});

/// Physical mean action of the policy at s.
Vec mean_action(const envs::Env& env, const nn::GaussianPolicy& policy, const Vec& s);

}  // namespace polyc::policy
