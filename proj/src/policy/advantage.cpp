#include "polyc/policy/advantage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polyc::policy {

std::vector<double> gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        const std::vector<double>& next_values, const std::vector<bool>& dones,
                        const std::vector<bool>& episode_end, double gamma, double lambda) {
  const auto n = rewards.size();
  if (n == 0) throw std::invalid_argument("gae: empty buffer");
  if (values.size() != n || next_values.size() != n || dones.size() != n || episode_end.size() != n) {
    throw DimensionError("gae: input lengths differ");
  }
  std::vector<double> adv(n);
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    if (episode_end[k]) running = 0.0;
    const double bootstrap = dones[k] ? 0.0 : next_values[k];
    const double delta = rewards[k] + gamma * bootstrap - values[k];
    running = delta + gamma * lambda * running;
    adv[k] = running;
  }
  return adv;
}

void compute_advantages(TrajectoryBuffer& buffer, double gamma, double lambda) {
  if (buffer.empty()) throw std::invalid_argument("compute_advantages: empty buffer");
  std::vector<double> rewards;
  std::vector<bool> dones;
  rewards.reserve(buffer.size());
  dones.reserve(buffer.size());
  for (const auto& tr : buffer.transitions) {
    rewards.push_back(tr.r);
    dones.push_back(tr.done);
  }
  buffer.advantages = gae(rewards, buffer.values, buffer.next_values, dones, buffer.episode_end, gamma, lambda);
  buffer.returns.resize(buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) buffer.returns[i] = buffer.advantages[i] + buffer.values[i];
}

std::vector<double> normalize(const std::vector<double>& x) {
  if (x.empty()) return {};
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  const double sd = std::sqrt(var);
  std::vector<double> out(x.size(), 0.0);
  if (sd < 1e-12) return out;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
  return out;
}

double blended_advantage(double adv, double lie, double beta) {
  return (1.0 - beta) * adv + beta * std::min(0.0, -lie);
}

double ppo_clip_surrogate(double ratio, double adv, double clip_eps) {
  const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  return std::min(ratio * adv, clipped * adv);
}

double ppo_clip_surrogate_dratio(double ratio, double adv, double clip_eps) {
  const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  if (clipped == ratio) return adv;
  return ratio * adv < clipped * adv ? adv : 0.0;
}

double beta_lagrange_update(double beta, double mean_lie, double alpha_beta) {
  return std::clamp(beta - alpha_beta * mean_lie, 0.0, 1.0);
}

}  // namespace polyc::policy
