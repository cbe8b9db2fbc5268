#pragma once

#include "polyc/envs/env.hpp"

namespace polyc::envs {

/**
 * 6-DOF "+"-configuration quadrotor tracking a horizontal constant-velocity
 * reference along x. The state is expressed in tracking-error coordinates so
 * that the tracking task has a fixed equilibrium:
 *
 *   [ex, ey, ez, vx - v_ref, vy, vz, roll, pitch, yaw, p, q, r]
 *
 * with (p, q, r) the body angular rates. Rotor order: 1 front (+x), 2 left
 * (+y), 3 back, 4 right; rotors 1/3 spin opposite to 2/4. RK4 integration.
 */
class Quadrotor final : public Env {
 public:
  struct Params {
    double mass = 0.5;
    double arm = 0.17;
    double k_f = 3e-6;
    double k_m = 1.1e-7;
    double ixx = 3.2e-3;
    double iyy = 3.2e-3;
    double izz = 5.5e-3;
    double g = 9.81;
    double dt = 0.01;
    int horizon = 500;
    double max_rotor_speed = 1000.0;
    double ref_speed = 0.5;
    double gimbal_margin = 0.05;
    double policy_action_scale = 100.0;
  };

  Quadrotor();
  explicit Quadrotor(Params p);

  const Params& params() const { return p_; }
  double hover_speed() const;

  std::string name() const override { return "quadrotor"; }
  int state_dim() const override { return 12; }
  int action_dim() const override { return 4; }
  double dt() const override { return p_.dt; }
  int horizon() const override { return p_.horizon; }
  Box domain() const override;
  Box action_bounds() const override;
  Vec equilibrium() const override { return Vec::Zero(12); }
  Vec equilibrium_action() const override { return Vec::Constant(4, hover_speed()); }
  Vec action_center() const override { return equilibrium_action(); }
  Vec action_scale() const override { return Vec::Constant(4, p_.policy_action_scale); }

  /// Position error norm.
  double tracking_error(const Vec& s) const override { return s.head<3>().norm(); }

  /// Continuous-time vector field for rotor speeds `omega` (already clamped).
  Vec derivative(const Vec& s, const Vec& omega) const;
  /// Body torques (roll, pitch, yaw) produced by rotor speeds.
  Eigen::Vector3d body_torques(const Vec& omega) const;

  StepResult step(const Vec& s, const Vec& a, EpisodeClock& clock) const override;
  double reward(const Vec& s, const Vec& a, const EpisodeClock& clock) const override;

  nlohmann::json to_json() const override;
  static Quadrotor from_json(const nlohmann::json& j);

 private:
  Params p_;
};

}  // namespace polyc::envs
