#pragma once

#include "polyc/envs/env.hpp"
#include "polyc/nn/mlp.hpp"
#include "polyc/nn/optimizer.hpp"

#include <functional>
#include <string>
#include <vector>

namespace polyc::lyapunov {

/// Neural Lyapunov candidate V(s). Deliberately unconstrained: positivity is
/// only encouraged by the risk and checked afterwards by the validator.
struct LyapunovCritic {
  nn::Mlp net;
  Vec origin;
  /// Optional positivity margin: the positivity hinge becomes
  /// max(margin * |s - origin| - V(s), 0). Zero reproduces the plain risk.
  double margin = 0.0;

  static LyapunovCritic make(int state_dim, const std::vector<int>& hidden, nn::Activation act, Vec origin, Rng& rng);

  double value(const Vec& s) const { return net.value(s); }

  nlohmann::json to_json() const;
  static LyapunovCritic from_json(const nlohmann::json& j);
};

/// Consecutive state pairs at a fixed spacing dt.
struct RiskBatch {
  std::vector<Vec> states;
  std::vector<Vec> next_states;
  double dt = 0.0;

  std::size_t size() const { return states.size(); }
};

/// (V(s_next) - V(s)) / dt. Throws std::invalid_argument when dt <= 0.
double sampled_lie_derivative(const LyapunovCritic& v, const Vec& s, const Vec& s_next, double dt);

/// Same finite difference for an arbitrary scalar function.
double sampled_lie_derivative(const std::function<double(const Vec&)>& v, const Vec& s, const Vec& s_next,
                              double dt);

/// Discretized empirical Lyapunov risk:
///   mean_i [max(-V(s_i), 0) + max(0, lie_i)] + V(origin)^2.
double lyapunov_risk(const LyapunovCritic& v, const RiskBatch& batch);

/// The same risk for an arbitrary candidate function.
double lyapunov_risk(const ScalarField& v, const Vec& origin, const RiskBatch& batch, double margin = 0.0);

/// Risk and its exact gradient with respect to the critic parameters. The
/// gradient flows through V(s_i), V(s_i') and V(origin). `grad` is overwritten.
double lyapunov_risk_grad(const LyapunovCritic& v, const RiskBatch& batch, Vec& grad);

/// How successor states are obtained for the risk.
enum class LieResample { stored, mean_action };

LieResample lie_resample_from_string(const std::string& s);
std::string to_string(LieResample m);

/// Maps a state to the physical action of the deterministic (mean) policy.
using ActionFn = std::function<Vec(const Vec&)>;

/// Builds risk pairs from transitions. In mean_action mode each s is
/// re-stepped with `mean_action(s)` from its recorded episode clock, so the
/// pairs follow the policy currently being evaluated.
RiskBatch make_risk_batch(const std::vector<envs::Transition>& transitions, const envs::Env& env,
                          const ActionFn& mean_action, LieResample mode);

struct CriticTrainResult {
  double risk = 0.0;  // mean risk over all pairs after the update
  int steps_taken = 0;
  bool aborted = false;
};

/**
 * `minibatches` gradient steps on the risk, each over `batch_size` pairs drawn
 * uniformly from `pairs`. A non-finite risk or gradient restores the
 * parameters from before the offending step and stops.
 */
CriticTrainResult critic_train_step(LyapunovCritic& v, const RiskBatch& pairs, nn::Optimizer& opt,
                                    std::size_t batch_size, int minibatches, Rng& rng);

}  // namespace polyc::lyapunov
