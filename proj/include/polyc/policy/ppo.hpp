#pragma once

#include "polyc/lyapunov/critic.hpp"
#include "polyc/nn/optimizer.hpp"
#include "polyc/policy/advantage.hpp"

#include <vector>

namespace polyc::policy {

/// Raised when an update cannot recover from non-finite values.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SurrogateStats {
  double mean_ratio = 0.0;
  double clip_frac = 0.0;
  double surrogate = 0.0;
};

/**
 * Mean clipped surrogate plus entropy_coef * entropy over a minibatch, and
 * its gradient with respect to the policy parameters (ascent direction).
 * `adv` is the advantage used as the weight (already blended if desired).
 */
double clipped_objective_grad(const nn::GaussianPolicy& policy, const std::vector<const Vec*>& states,
                              const std::vector<const Vec*>& actions, const std::vector<double>& log_prob_old,
                              const std::vector<double>& adv, double clip_eps, double entropy_coef, Vec& grad,
                              SurrogateStats* stats = nullptr);

/// Sampled Lie derivative of `critic` at s under the deterministic mean action
/// of `policy`, re-stepping the environment from the recorded clock.
double lie_under_policy(const envs::Env& env, const ScalarField& critic, const nn::GaussianPolicy& policy,
                        const envs::Transition& tr);

struct PolicyUpdateConfig {
  double beta = 0.5;
  double clip_eps = 0.2;
  double entropy_coef = 0.0;
  int epochs = 10;
  std::size_t minibatch_size = 64;
  bool normalize_advantages = true;
  /// mean-action: re-step s with the current mean action every minibatch;
  /// stored: use the recorded successor of the sampled action.
  lyapunov::LieResample lie_resample = lyapunov::LieResample::mean_action;
};

struct PolicyUpdateDiagnostics {
  double mean_ratio = 1.0;
  double clip_frac = 0.0;
  double mean_lie = 0.0;
  double surrogate = 0.0;
  double entropy = 0.0;
  bool lr_halved = false;
};

/**
 * Clipped policy-gradient epochs on the Lyapunov-blended advantage. The Lie
 * term is recomputed for every minibatch with the current policy, so it
 * tracks the parameters being optimized. Diagnostics are averaged over the
 * final epoch. A non-finite epoch is rolled back and retried once at half the
 * learning rate; a second failure throws TrainingError.
 */
PolicyUpdateDiagnostics policy_update(nn::GaussianPolicy& policy, nn::Optimizer& opt, const TrajectoryBuffer& buffer,
                                      const envs::Env& env, const ScalarField& critic, const PolicyUpdateConfig& cfg,
                                      Rng& rng);

/// One gradient step on mean (V(s) - target)^2; returns the pre-step loss.
double value_regression_step(nn::Mlp& value_net, const std::vector<const Vec*>& states,
                             const std::vector<double>& targets, nn::Optimizer& opt);

/// Mean squared error of value_net against targets.
double value_loss(const nn::Mlp& value_net, const std::vector<const Vec*>& states, const std::vector<double>& targets);

/// Minibatch regression of V^r on buffer.returns for `epochs` epochs; returns
/// the final full-buffer loss. Same rollback rule as policy_update.
double value_update(nn::Mlp& value_net, nn::Optimizer& opt, const TrajectoryBuffer& buffer, int epochs,
                    std::size_t minibatch_size, Rng& rng);

}  // namespace polyc::policy
