#include "polyc/envs/linear.hpp"

#include "polyc/json_util.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace polyc::envs {

LinearSystem::LinearSystem(Mat a, Mat b, double dt, Box domain, Box action_bounds, int horizon)
    : a_(std::move(a)), b_(std::move(b)), dt_(dt), domain_(std::move(domain)),
      action_bounds_(std::move(action_bounds)), horizon_(horizon) {
  const auto n = a_.rows();
  const auto m = b_.cols();
  if (a_.cols() != n || b_.rows() != n) throw ConfigError("linear: A must be n x n and B n x m");
  if (!(dt_ > 0.0) || horizon_ <= 0) throw ConfigError("linear: dt and horizon must be positive");
  require_dim(static_cast<Eigen::Index>(domain_.size()), n, "linear domain");
  require_dim(static_cast<Eigen::Index>(action_bounds_.size()), m, "linear action bounds");
  Mat aug = Mat::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a_ * dt_;
  aug.topRightCorner(n, m) = b_ * dt_;
  Mat e = aug.exp();
  phi_ = e.topLeftCorner(n, n);
  gamma_ = e.topRightCorner(n, m);
  init_region_ = domain_;
}

LinearSystem LinearSystem::scalar_rate(int n, double rate, double dt, double half_width) {
  return {Mat::Identity(n, n) * rate, Mat::Zero(n, 1), dt, Box(static_cast<std::size_t>(n), {-half_width, half_width}),
          Box{{-1.0, 1.0}}};
}

StepResult LinearSystem::step(const Vec& s, const Vec& a, EpisodeClock& clock) const {
  require_dim(s.size(), state_dim(), "LinearSystem state");
  require_dim(a.size(), action_dim(), "LinearSystem action");
  StepResult out;
  out.next = phi_ * s + gamma_ * clamp_action(a);
  clock.t += dt_;
  ++clock.steps;
  return out;
}

double LinearSystem::reward(const Vec& s, const Vec& a, const EpisodeClock&) const {
  return -(s.squaredNorm() + 0.01 * clamp_action(a).squaredNorm());
}

nlohmann::json LinearSystem::to_json() const {
  return {{"name", "linear"},
          {"A", mat_to_json(a_)},
          {"B", mat_to_json(b_)},
          {"dt", dt_},
          {"domain", box_to_json(domain_)},
          {"action_bounds", box_to_json(action_bounds_)},
          {"horizon", horizon_},
          {"termination_penalty", termination_penalty_},
          {"init_region", box_to_json(init_region_)}};
}

LinearSystem LinearSystem::from_json(const nlohmann::json& j) {
  check_keys(j, {"name", "A", "B", "dt", "domain", "action_bounds", "horizon", "termination_penalty", "init_region"},
             "env(linear)");
  LinearSystem env(mat_from_json(j.at("A")), mat_from_json(j.at("B")), j.at("dt").get<double>(),
                   box_from_json(j.at("domain")), box_from_json(j.at("action_bounds")), get_or(j, "horizon", 200));
  env.set_termination_penalty(get_or(j, "termination_penalty", 0.0));
  if (j.contains("init_region")) env.set_init_region(box_from_json(j.at("init_region")));
  return env;
}

}  // namespace polyc::envs
