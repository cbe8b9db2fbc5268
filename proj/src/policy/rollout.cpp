#include "polyc/policy/rollout.hpp"

#include <numeric>

namespace polyc::policy {

void TrajectoryBuffer::clear() { *this = TrajectoryBuffer{}; }

double TrajectoryBuffer::mean_episode_return() const {
  double sum = 0.0;
  int count = 0;
  for (std::size_t e = 0; e < episode_returns.size(); ++e) {
    if (episode_complete[e]) {
      sum += episode_returns[e];
      ++count;
    }
  }
  if (count > 0) return sum / count;
  if (episode_returns.empty()) return 0.0;
  return std::accumulate(episode_returns.begin(), episode_returns.end(), 0.0) /
         static_cast<double>(episode_returns.size());
}

TrajectoryBuffer collect_rollouts(const envs::Env& env, const nn::GaussianPolicy& policy, const nn::Mlp& value_net,
                                  std::size_t steps, Rng& rng) {
  TrajectoryBuffer buf;
  buf.transitions.reserve(steps);
  envs::EpisodeClock clock;
  Vec s;
  bool need_reset = true;
  double ep_return = 0.0;
  while (buf.size() < steps) {
    if (need_reset) {
      s = env.reset(rng, clock);
      buf.episode_starts.push_back(buf.size());
      ep_return = 0.0;
      need_reset = false;
    }
    envs::Transition tr;
    tr.s = s;
    tr.clock = clock;
    Vec raw = policy.sample(s, rng);
    tr.a = env.to_physical_action(raw);
    auto res = env.step(s, tr.a, clock);
    tr.r = env.reward(s, tr.a, tr.clock);
    if (res.done) tr.r -= env.termination_penalty();
    tr.s_next = res.next;
    tr.dt = env.dt();
    tr.done = res.done;
    ep_return += tr.r;

    const bool horizon_hit = clock.steps >= env.horizon();
    const bool last = buf.size() + 1 == steps;
    const bool end = res.done || horizon_hit || last;

    buf.log_prob_old.push_back(policy.log_prob(s, raw));
    buf.policy_actions.push_back(std::move(raw));
    buf.values.push_back(value_net.value(s));
    buf.next_values.push_back(value_net.value(res.next));
    buf.episode_end.push_back(end);
    buf.transitions.push_back(std::move(tr));
    s = res.next;
    if (end) {
      buf.episode_returns.push_back(ep_return);
      buf.episode_complete.push_back(res.done || horizon_hit);
      need_reset = true;
    }
  }
  return buf;
}

}  // namespace polyc::policy
