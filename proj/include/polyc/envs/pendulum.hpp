#pragma once

#include "polyc/envs/env.hpp"

namespace polyc::envs {

/// Torque-limited inverted pendulum, state (theta, theta_dot) with theta = 0
/// upright. Semi-implicit Euler, matching the classic Gym pendulum.
class Pendulum final : public Env {
 public:
  struct Params {
    double g = 10.0;
    double mass = 1.0;
    double length = 1.0;
    double dt = 0.05;
    double max_torque = 2.0;
    double max_speed = 8.0;
    int horizon = 200;
  };

  Pendulum();
  explicit Pendulum(Params p);

  const Params& params() const { return p_; }

  std::string name() const override { return "pendulum"; }
  int state_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  double dt() const override { return p_.dt; }
  int horizon() const override { return p_.horizon; }
  Box domain() const override;
  Box action_bounds() const override;
  Vec equilibrium() const override { return Vec::Zero(2); }
  Vec equilibrium_action() const override { return Vec::Zero(1); }

  StepResult step(const Vec& s, const Vec& a, EpisodeClock& clock) const override;
  double reward(const Vec& s, const Vec& a, const EpisodeClock& clock) const override;

  Vec deviation(const Vec& s) const override { return Vec{{wrap_angle(s[0]), s[1]}}; }

  /// True when theta crossed the +-pi seam between two consecutive states.
  static bool wrapped(double theta_prev, double theta_next);

  nlohmann::json to_json() const override;
  static Pendulum from_json(const nlohmann::json& j);

 private:
  Params p_;
};

}  // namespace polyc::envs
