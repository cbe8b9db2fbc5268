#pragma once

#include "polyc/policy/rollout.hpp"

#include <vector>

namespace polyc::policy {

/**
 * Generalized advantage estimation over contiguous episodes.
 *   delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
 *   A_t     = delta_t + gamma * lambda * A_{t+1}   (reset at episode ends)
 * lambda = 1 gives the plain discounted sum of TD residuals.
 */
std::vector<double> gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        const std::vector<double>& next_values, const std::vector<bool>& dones,
                        const std::vector<bool>& episode_end, double gamma, double lambda);

/// Fills buffer.advantages and buffer.returns from the cached values.
void compute_advantages(TrajectoryBuffer& buffer, double gamma, double lambda);

/// Zero-mean, unit-std copy. A constant input maps to zeros.
std::vector<double> normalize(const std::vector<double>& x);

/// (1 - beta) * adv + beta * min(0, -lie).
double blended_advantage(double adv, double lie, double beta);

/// min(ratio * adv, clamp(ratio, 1 - eps, 1 + eps) * adv).
double ppo_clip_surrogate(double ratio, double adv, double clip_eps);

/// d surrogate / d ratio (zero where the clipped branch is active).
double ppo_clip_surrogate_dratio(double ratio, double adv, double clip_eps);

/// clamp(beta - alpha * mean_lie, 0, 1).
double beta_lagrange_update(double beta, double mean_lie, double alpha_beta);

}  // namespace polyc::policy
