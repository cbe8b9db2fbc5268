#pragma once

#include "polyc/types.hpp"

#include <cstdint>
#include <string>

namespace polyc::nn {

enum class OptimizerKind { sgd, adam };

OptimizerKind optimizer_kind_from_string(const std::string& s);

/// First-order minimizer over a flat parameter vector.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr);
  std::int64_t step_count() const { return step_count_; }

  /// One descent step p <- p - update(g). Throws NumericalError on non-finite
  /// gradients or if the step would produce non-finite parameters; `params`
  /// and the optimizer state are left untouched in that case.
  void step(Vec& params, const Vec& grads);

  void reset();

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

 private:
  OptimizerKind kind_;
  double lr_;
  std::int64_t step_count_ = 0;
  Vec m_;
  Vec v_;
};

}  // namespace polyc::nn
