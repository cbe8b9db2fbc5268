#include "polyc/envs/env.hpp"

#include "polyc/envs/linear.hpp"
#include "polyc/envs/path_tracking.hpp"
#include "polyc/envs/pendulum.hpp"
#include "polyc/envs/quadrotor.hpp"

#include <cmath>
#include <numbers>

namespace polyc::envs {

Vec Env::action_center() const { return box_center(action_bounds()); }

Vec Env::action_scale() const {
  auto b = action_bounds();
  Vec s(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) s[static_cast<Eigen::Index>(i)] = 0.5 * b[i].width();
  return s;
}

Vec Env::to_physical_action(const Vec& policy_action) const {
  require_dim(policy_action.size(), action_dim(), "Env::to_physical_action");
  return clamp_action(action_center() + action_scale().cwiseProduct(policy_action));
}

Vec Env::deviation(const Vec& s) const {
  require_dim(s.size(), state_dim(), "Env::deviation");
  return s - equilibrium();
}

void Env::set_init_region(Box region) {
  require_dim(static_cast<Eigen::Index>(region.size()), state_dim(), "Env init region");
  for (const auto& iv : region) {
    if (!(iv.lo <= iv.hi)) throw std::invalid_argument("init region interval has lo > hi");
  }
  init_region_ = std::move(region);
}

Vec Env::reset(Rng& rng, EpisodeClock& clock) const {
  clock = EpisodeClock{};
  return box_sample(init_region_, rng);
}

double wrap_angle(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(std::numbers::pi - x, two_pi);
  if (r < 0.0) r += two_pi;
  return std::numbers::pi - r;
}

std::unique_ptr<Env> make_env(const nlohmann::json& cfg) {
  const auto name = cfg.at("name").get<std::string>();
  if (name == "pendulum") return std::make_unique<Pendulum>(Pendulum::from_json(cfg));
  if (name == "path_tracking") return std::make_unique<PathTracking>(PathTracking::from_json(cfg));
  if (name == "quadrotor") return std::make_unique<Quadrotor>(Quadrotor::from_json(cfg));
  if (name == "linear") return std::make_unique<LinearSystem>(LinearSystem::from_json(cfg));
  throw std::invalid_argument("unknown environment '" + name + "'");
}

}  // namespace polyc::envs
