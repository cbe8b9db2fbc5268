#pragma once

#include "polyc/envs/env.hpp"

namespace polyc::envs {

/// x' = A x + B u, stepped with the exact zero-order-hold flow. Used as the
/// analytic fixture for risk, Lie-derivative and certification oracles.
class LinearSystem final : public Env {
 public:
  LinearSystem(Mat a, Mat b, double dt, Box domain, Box action_bounds, int horizon = 200);

  /// x' = rate * x in n dimensions with a single (unused by default) input.
  static LinearSystem scalar_rate(int n, double rate, double dt, double half_width = 1.0);

  const Mat& a() const { return a_; }
  const Mat& b() const { return b_; }
  const Mat& flow_a() const { return phi_; }
  const Mat& flow_b() const { return gamma_; }

  std::string name() const override { return "linear"; }
  int state_dim() const override { return static_cast<int>(a_.rows()); }
  int action_dim() const override { return static_cast<int>(b_.cols()); }
  double dt() const override { return dt_; }
  int horizon() const override { return horizon_; }
  Box domain() const override { return domain_; }
  Box action_bounds() const override { return action_bounds_; }
  Vec equilibrium() const override { return Vec::Zero(a_.rows()); }
  Vec equilibrium_action() const override { return Vec::Zero(b_.cols()); }

  StepResult step(const Vec& s, const Vec& a, EpisodeClock& clock) const override;
  double reward(const Vec& s, const Vec& a, const EpisodeClock& clock) const override;

  nlohmann::json to_json() const override;
  static LinearSystem from_json(const nlohmann::json& j);

 private:
  Mat a_, b_;
  double dt_;
  Box domain_, action_bounds_;
  int horizon_;
  Mat phi_, gamma_;
};

}  // namespace polyc::envs
