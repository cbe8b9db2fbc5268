#pragma once

#include "polyc/envs/env.hpp"
#include "polyc/nn/gaussian_policy.hpp"

#include <vector>

namespace polyc::policy {

/// One iteration's on-policy experience plus the per-transition caches the
/// update needs. Episodes are stored contiguously.
struct TrajectoryBuffer {
  std::vector<envs::Transition> transitions;
  std::vector<Vec> policy_actions;    // raw samples in policy space (log-prob domain)
  std::vector<double> log_prob_old;   // log pi_old(policy_action | s)
  std::vector<double> values;         // V^r(s)
  std::vector<double> next_values;    // V^r(s_next)
  std::vector<bool> episode_end;      // last transition of an episode (done, horizon or cut)
  std::vector<std::size_t> episode_starts;
  std::vector<double> episode_returns;  // undiscounted, one per episode
  std::vector<bool> episode_complete;   // false for the final, cut-short episode

  std::vector<double> advantages;  // raw GAE advantages
  std::vector<double> returns;     // advantage + V^r(s)

  std::size_t size() const { return transitions.size(); }
  bool empty() const { return transitions.empty(); }
  void clear();

  /// Mean return over completed episodes, or over all episodes if none completed.
  double mean_episode_return() const;
};

/// Samples actions from `policy` and steps `env` until exactly `steps`
/// transitions are recorded, starting fresh episodes at each reset.
TrajectoryBuffer collect_rollouts(const envs::Env& env, const nn::GaussianPolicy& policy, const nn::Mlp& value_net,
                                  std::size_t steps, Rng& rng);

}  // namespace polyc::policy
