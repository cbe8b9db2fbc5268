#pragma once

#include "polyc/envs/env.hpp"

#include <cmath>
#include <vector>

namespace polyc::envs {

/// Reference path as consecutive constant-curvature segments. Past the last
/// segment the final curvature continues.
class Path {
 public:
  struct Segment {
    double length = 0.0;
    double curvature = 0.0;
  };

  Path() = default;
  explicit Path(std::vector<Segment> segments);

  /// Straight lead-in followed by one constant-curvature arc (kappa = 0.05).
  static Path training();
  /// Alternating left/right arcs, never seen during training.
  static Path unseen();
  static Path straight();
  static Path circle(double curvature);

  double curvature_at(double arc_length) const;
  double total_length() const;
  const std::vector<Segment>& segments() const { return segments_; }

  nlohmann::json to_json() const;
  static Path from_json(const nlohmann::json& j);

 private:
  std::vector<Segment> segments_;
};

/**
 * Kinematic bicycle in path-error coordinates, state (d_e, theta_e, v, v_target),
 * action (acceleration, steering angle). Forward Euler.
 */
class PathTracking final : public Env {
 public:
  struct Params {
    double wheelbase = 2.5;
    double dt = 0.02;
    int horizon = 500;
    double max_accel = 2.0;
    double max_steer = 0.6;
    double nominal_speed = 5.0;
  };

  PathTracking();
  PathTracking(Params p, Path path);

  const Params& params() const { return p_; }
  const Path& path() const { return path_; }
  void set_path(Path path) { path_ = std::move(path); }

  std::string name() const override { return "path_tracking"; }
  int state_dim() const override { return 4; }
  int action_dim() const override { return 2; }
  double dt() const override { return p_.dt; }
  int horizon() const override { return p_.horizon; }
  Box domain() const override;
  Box action_bounds() const override;
  Vec equilibrium() const override;
  Vec equilibrium_action() const override { return Vec::Zero(2); }

  StepResult step(const Vec& s, const Vec& a, EpisodeClock& clock) const override;
  double reward(const Vec& s, const Vec& a, const EpisodeClock& clock) const override;

  /// (d_e, theta_e, v - v_target).
  Vec deviation(const Vec& s) const override { return Vec{{s[0], s[1], s[2] - s[3]}}; }
  double tracking_error(const Vec& s) const override { return std::abs(s[0]); }

  nlohmann::json to_json() const override;
  static PathTracking from_json(const nlohmann::json& j);

  static constexpr double kSingularityGuard = 1e-3;

 private:
  Params p_;
  Path path_;
};

}  // namespace polyc::envs
