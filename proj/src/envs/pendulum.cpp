#include "polyc/envs/pendulum.hpp"

#include "polyc/json_util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace polyc::envs {

Pendulum::Pendulum() : Pendulum(Params{}) {}

Pendulum::Pendulum(Params p) : p_(p) {
  if (!(p_.dt > 0.0) || p_.horizon <= 0) throw ConfigError("pendulum: dt and horizon must be positive");
  init_region_ = {{-std::numbers::pi, std::numbers::pi}, {-1.0, 1.0}};
}

Box Pendulum::domain() const { return {{-std::numbers::pi, std::numbers::pi}, {-p_.max_speed, p_.max_speed}}; }

Box Pendulum::action_bounds() const { return {{-p_.max_torque, p_.max_torque}}; }

StepResult Pendulum::step(const Vec& s, const Vec& a, EpisodeClock& clock) const {
  require_dim(s.size(), 2, "Pendulum state");
  require_dim(a.size(), 1, "Pendulum action");
  const double u = std::clamp(a[0], -p_.max_torque, p_.max_torque);
  const double th = s[0];
  const double thdot = s[1];
  const double acc = 3.0 * p_.g / (2.0 * p_.length) * std::sin(th) +
                     3.0 / (p_.mass * p_.length * p_.length) * u;
  const double new_thdot = std::clamp(thdot + acc * p_.dt, -p_.max_speed, p_.max_speed);
  const double new_th = wrap_angle(th + new_thdot * p_.dt);
  clock.t += p_.dt;
  ++clock.steps;
  StepResult out;
  out.next = Vec(2);
  out.next << new_th, new_thdot;
  return out;
}

double Pendulum::reward(const Vec& s, const Vec& a, const EpisodeClock&) const {
  const double th = wrap_angle(s[0]);
  const double u = std::clamp(a[0], -p_.max_torque, p_.max_torque);
  return -(th * th + 0.1 * s[1] * s[1] + 0.001 * u * u);
}

bool Pendulum::wrapped(double theta_prev, double theta_next) {
  return std::abs(theta_next - theta_prev) > std::numbers::pi;
}

nlohmann::json Pendulum::to_json() const {
  return {{"name", "pendulum"},
          {"g", p_.g},
          {"mass", p_.mass},
          {"length", p_.length},
          {"dt", p_.dt},
          {"max_torque", p_.max_torque},
          {"max_speed", p_.max_speed},
          {"horizon", p_.horizon},
          {"termination_penalty", termination_penalty_},
          {"init_region", box_to_json(init_region_)}};
}

Pendulum Pendulum::from_json(const nlohmann::json& j) {
  check_keys(j, {"name", "g", "mass", "length", "dt", "max_torque", "max_speed", "horizon",
                 "termination_penalty", "init_region"},
             "env(pendulum)");
  Params p;
  p.g = get_or(j, "g", p.g);
  p.mass = get_or(j, "mass", p.mass);
  p.length = get_or(j, "length", p.length);
  p.dt = get_or(j, "dt", p.dt);
  p.max_torque = get_or(j, "max_torque", p.max_torque);
  p.max_speed = get_or(j, "max_speed", p.max_speed);
  p.horizon = get_or(j, "horizon", p.horizon);
  Pendulum env(p);
  env.set_termination_penalty(get_or(j, "termination_penalty", 0.0));
  if (j.contains("init_region")) env.set_init_region(box_from_json(j.at("init_region")));
  return env;
}

}  // namespace polyc::envs
