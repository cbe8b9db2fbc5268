#include "polyc/envs/quadrotor.hpp"

#include "polyc/json_util.hpp"

#include <cmath>
#include <numbers>

namespace polyc::envs {

Quadrotor::Quadrotor() : Quadrotor(Params{}) {}

Quadrotor::Quadrotor(Params p) : p_(p) {
  if (!(p_.dt > 0.0) || p_.horizon <= 0 || !(p_.mass > 0.0)) {
    throw ConfigError("quadrotor: dt, horizon and mass must be positive");
  }
  if (hover_speed() > p_.max_rotor_speed) throw ConfigError("quadrotor: max rotor speed below hover speed");
  init_region_ = Box(12, Interval{0.0, 0.0});
  for (int i = 0; i < 3; ++i) init_region_[static_cast<std::size_t>(i)] = {-0.5, 0.5};
  for (int i = 6; i < 9; ++i) init_region_[static_cast<std::size_t>(i)] = {-0.1, 0.1};
}

double Quadrotor::hover_speed() const { return std::sqrt(p_.mass * p_.g / (4.0 * p_.k_f)); }

Box Quadrotor::domain() const {
  const double tilt = std::numbers::pi / 2.0 - p_.gimbal_margin;
  Box d;
  for (int i = 0; i < 3; ++i) d.push_back({-3.0, 3.0});
  for (int i = 0; i < 3; ++i) d.push_back({-3.0, 3.0});
  d.push_back({-tilt, tilt});
  d.push_back({-tilt, tilt});
  d.push_back({-std::numbers::pi, std::numbers::pi});
  for (int i = 0; i < 3; ++i) d.push_back({-10.0, 10.0});
  return d;
}

Box Quadrotor::action_bounds() const { return Box(4, Interval{0.0, p_.max_rotor_speed}); }

Eigen::Vector3d Quadrotor::body_torques(const Vec& omega) const {
  const Vec w2 = omega.array().square();
  return {p_.arm * p_.k_f * (w2[3] - w2[1]), p_.arm * p_.k_f * (w2[2] - w2[0]),
          p_.k_m * (-w2[0] + w2[1] - w2[2] + w2[3])};
}

Vec Quadrotor::derivative(const Vec& s, const Vec& omega) const {
  const double phi = s[6], theta = s[7], psi = s[8];
  const double p = s[9], q = s[10], r = s[11];
  const double thrust = p_.k_f * omega.array().square().sum();
  const double cphi = std::cos(phi), sphi = std::sin(phi);
  const double cth = std::cos(theta), sth = std::sin(theta), tth = std::tan(theta);
  const double cpsi = std::cos(psi), spsi = std::sin(psi);
  const Eigen::Vector3d tau = body_torques(omega);

  Vec d(12);
  d.segment<3>(0) = s.segment<3>(3);
  // Z-Y-X Euler rotation applied to body-frame thrust (0, 0, T).
  d[3] = thrust / p_.mass * (cpsi * sth * cphi + spsi * sphi);
  d[4] = thrust / p_.mass * (spsi * sth * cphi - cpsi * sphi);
  d[5] = thrust / p_.mass * (cth * cphi) - p_.g;
  d[6] = p + q * sphi * tth + r * cphi * tth;
  d[7] = q * cphi - r * sphi;
  d[8] = (q * sphi + r * cphi) / cth;
  d[9] = (tau[0] - q * r * (p_.izz - p_.iyy)) / p_.ixx;
  d[10] = (tau[1] - p * r * (p_.ixx - p_.izz)) / p_.iyy;
  d[11] = (tau[2] - p * q * (p_.iyy - p_.ixx)) / p_.izz;
  return d;
}

StepResult Quadrotor::step(const Vec& s, const Vec& a, EpisodeClock& clock) const {
  require_dim(s.size(), 12, "Quadrotor state");
  require_dim(a.size(), 4, "Quadrotor action");
  const Vec omega = clamp_action(a);
  const double h = p_.dt;
  const Vec k1 = derivative(s, omega);
  const Vec k2 = derivative(s + 0.5 * h * k1, omega);
  const Vec k3 = derivative(s + 0.5 * h * k2, omega);
  const Vec k4 = derivative(s + h * k3, omega);
  StepResult out;
  out.next = s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.next.allFinite()) throw NumericalError("quadrotor: non-finite state");
  clock.t += h;
  ++clock.steps;
  out.done = std::abs(out.next[7]) >= std::numbers::pi / 2.0 - p_.gimbal_margin;
  return out;
}

double Quadrotor::reward(const Vec& s, const Vec&, const EpisodeClock&) const {
  return -(s.segment<3>(0).squaredNorm() + 0.1 * s.segment<3>(3).squaredNorm() +
           0.25 * (s[6] * s[6] + s[7] * s[7]) + 0.01 * s.segment<3>(9).squaredNorm());
}

nlohmann::json Quadrotor::to_json() const {
  return {{"name", "quadrotor"},
          {"mass", p_.mass},
          {"arm", p_.arm},
          {"k_f", p_.k_f},
          {"k_m", p_.k_m},
          {"ixx", p_.ixx},
          {"iyy", p_.iyy},
          {"izz", p_.izz},
          {"g", p_.g},
          {"dt", p_.dt},
          {"horizon", p_.horizon},
          {"max_rotor_speed", p_.max_rotor_speed},
          {"ref_speed", p_.ref_speed},
          {"gimbal_margin", p_.gimbal_margin},
          {"policy_action_scale", p_.policy_action_scale},
          {"termination_penalty", termination_penalty_},
          {"init_region", box_to_json(init_region_)}};
}

Quadrotor Quadrotor::from_json(const nlohmann::json& j) {
  check_keys(j, {"name", "mass", "arm", "k_f", "k_m", "ixx", "iyy", "izz", "g", "dt", "horizon",
                 "max_rotor_speed", "ref_speed", "gimbal_margin", "policy_action_scale", "termination_penalty",
                 "init_region"},
             "env(quadrotor)");
  Params p;
  p.mass = get_or(j, "mass", p.mass);
  p.arm = get_or(j, "arm", p.arm);
  p.k_f = get_or(j, "k_f", p.k_f);
  p.k_m = get_or(j, "k_m", p.k_m);
  p.ixx = get_or(j, "ixx", p.ixx);
  p.iyy = get_or(j, "iyy", p.iyy);
  p.izz = get_or(j, "izz", p.izz);
  p.g = get_or(j, "g", p.g);
  p.dt = get_or(j, "dt", p.dt);
  p.horizon = get_or(j, "horizon", p.horizon);
  p.max_rotor_speed = get_or(j, "max_rotor_speed", p.max_rotor_speed);
  p.ref_speed = get_or(j, "ref_speed", p.ref_speed);
  p.gimbal_margin = get_or(j, "gimbal_margin", p.gimbal_margin);
  p.policy_action_scale = get_or(j, "policy_action_scale", p.policy_action_scale);
  Quadrotor env(p);
  env.set_termination_penalty(get_or(j, "termination_penalty", 0.0));
  if (j.contains("init_region")) env.set_init_region(box_from_json(j.at("init_region")));
  return env;
}

}  // namespace polyc::envs
