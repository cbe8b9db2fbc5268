#pragma once

#include "polyc/types.hpp"

#include "json.hpp"

#include <memory>
#include <string>

namespace polyc::envs {

/// Per-episode context that the state vector does not carry (elapsed time,
/// arc length travelled along a reference path).
struct EpisodeClock {
  double t = 0.0;
  double progress = 0.0;
  int steps = 0;
};

struct StepResult {
  Vec next;
  bool done = false;  // terminated by a guard (not by the horizon)
};

struct Transition {
  Vec s;
  Vec a;  // physical action actually applied (after clamping)
  double r = 0.0;
  Vec s_next;
  double dt = 0.0;
  bool done = false;
  EpisodeClock clock;  // context at s, so s can be re-stepped with another action
};

/**
 * A controlled dynamical system. Instances are immutable once configured and
 * can be shared across threads; all per-episode state lives in EpisodeClock.
 */
class Env {
 public:
  virtual ~Env() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual double dt() const = 0;
  virtual int horizon() const = 0;
  virtual Box domain() const = 0;
  virtual Box action_bounds() const = 0;
  virtual Vec equilibrium() const = 0;
  virtual Vec equilibrium_action() const = 0;

  /// Advances one step from s with action a (clamped to action_bounds).
  virtual StepResult step(const Vec& s, const Vec& a, EpisodeClock& clock) const = 0;
  virtual double reward(const Vec& s, const Vec& a, const EpisodeClock& clock) const = 0;

  /// Policy outputs are mapped to physical actions as center + scale * output.
  virtual Vec action_center() const;
  virtual Vec action_scale() const;
  Vec to_physical_action(const Vec& policy_action) const;

  /// Extra reward added on guard terminations; zero by default.
  double termination_penalty() const { return termination_penalty_; }
  void set_termination_penalty(double p) { termination_penalty_ = p; }

  const Box& init_region() const { return init_region_; }
  void set_init_region(Box region);

  Vec reset(Rng& rng, EpisodeClock& clock) const;

  Vec clamp_action(const Vec& a) const { return box_clamp(action_bounds(), a); }

  /// Error coordinates used by evaluation: s - equilibrium by default.
  virtual Vec deviation(const Vec& s) const;
  /// Scalar tracking error reported as RMS by evaluation.
  virtual double tracking_error(const Vec& s) const { return deviation(s).norm(); }

  virtual nlohmann::json to_json() const = 0;

 protected:
  Box init_region_;
  double termination_penalty_ = 0.0;
};

/// Builds an environment from its configuration block ({"name": ..., ...}).
/// Unknown keys are rejected.
std::unique_ptr<Env> make_env(const nlohmann::json& cfg);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double x);

}  // namespace polyc::envs
