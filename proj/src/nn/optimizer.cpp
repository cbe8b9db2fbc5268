#include "polyc/nn/optimizer.hpp"

#include <cmath>

namespace polyc::nn {

OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + s + "'");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("optimizer learning rate must be positive");
  }
}

void Optimizer::set_learning_rate(double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("optimizer learning rate must be positive");
  lr_ = lr;
}

void Optimizer::reset() {
  step_count_ = 0;
  m_.resize(0);
  v_.resize(0);
}

void Optimizer::step(Vec& params, const Vec& grads) {
  require_dim(grads.size(), params.size(), "Optimizer::step");
  if (!grads.allFinite()) throw NumericalError("Optimizer::step: non-finite gradient");

  if (kind_ == OptimizerKind::sgd) {
    Vec next = params - lr_ * grads;
    if (!next.allFinite()) throw NumericalError("Optimizer::step: non-finite parameters");
    params = std::move(next);
    ++step_count_;
    return;
  }

  if (m_.size() != params.size()) {
    m_ = Vec::Zero(params.size());
    v_ = Vec::Zero(params.size());
  }
  const auto t = static_cast<double>(step_count_ + 1);
  Vec m = kBeta1 * m_ + (1.0 - kBeta1) * grads;
  Vec v = kBeta2 * v_ + (1.0 - kBeta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(kBeta1, t);
  const double c2 = 1.0 - std::pow(kBeta2, t);
  Vec next = params.array() - lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  if (!next.allFinite()) throw NumericalError("Optimizer::step: non-finite parameters");
  params = std::move(next);
  m_ = std::move(m);
  v_ = std::move(v);
  ++step_count_;
}

}  // namespace polyc::nn
