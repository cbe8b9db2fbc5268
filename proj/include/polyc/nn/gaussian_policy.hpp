#pragma once

#include "polyc/nn/mlp.hpp"

namespace polyc::nn {

/// Diagonal Gaussian over actions with a state-conditioned mean and a
/// state-independent log standard deviation.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(Mlp mean_net, Vec log_std);

  /// Glorot mean network with `hidden` layers, log_std initialized to `init_log_std`.
  static GaussianPolicy make(int state_dim, int action_dim, const std::vector<int>& hidden,
                             Activation activation, double init_log_std, Rng& rng);

  int state_dim() const { return mean_net_.input_dim(); }
  int action_dim() const { return mean_net_.output_dim(); }

  const Mlp& mean_net() const { return mean_net_; }
  const Vec& log_std() const { return log_std_; }
  void set_log_std(const Vec& log_std);

  Vec mean(const Vec& s) const { return mean_net_.forward(s); }
  double log_prob(const Vec& s, const Vec& a) const;
  Vec sample(const Vec& s, Rng& rng) const;
  /// Differential entropy; depends only on log_std.
  double entropy() const;

  /// Flat parameter vector [mean_net params, log_std].
  Eigen::Index num_params() const { return mean_net_.num_params() + log_std_.size(); }
  Vec params() const;
  void set_params(const Vec& p);

  /**
   * Adds scale * d log_prob(a|s) / d params into `grad` and returns log_prob.
   */
  double accumulate_log_prob_grad(const Vec& s, const Vec& a, double scale, Vec& grad) const;
  /// log_prob that keeps the mean-network tape for a later backward_log_prob.
  double log_prob_with_tape(const Vec& s, const Vec& a, Tape& tape) const;
  /// Adds scale * d log_prob / d params using a tape from log_prob_with_tape.
  void backward_log_prob(const Tape& tape, const Vec& a, double scale, Vec& grad) const;

  /// Adds scale * d entropy / d params into `grad`.
  void accumulate_entropy_grad(double scale, Vec& grad) const;

  nlohmann::json to_json() const;
  static GaussianPolicy from_json(const nlohmann::json& j);

 private:
  Mlp mean_net_;
  Vec log_std_;
};

}  // namespace polyc::nn
