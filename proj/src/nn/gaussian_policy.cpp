#include "polyc/nn/gaussian_policy.hpp"

#include <cmath>
#include <numbers>

namespace polyc::nn {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)
}

GaussianPolicy::GaussianPolicy(Mlp mean_net, Vec log_std)
    : mean_net_(std::move(mean_net)), log_std_(std::move(log_std)) {
  require_dim(log_std_.size(), mean_net_.output_dim(), "GaussianPolicy log_std");
  if (!log_std_.allFinite()) throw NumericalError("GaussianPolicy: non-finite log_std");
}

GaussianPolicy GaussianPolicy::make(int state_dim, int action_dim, const std::vector<int>& hidden,
                                    Activation activation, double init_log_std, Rng& rng) {
  std::vector<int> widths{state_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(action_dim);
  return {Mlp::glorot(widths, activation, rng), Vec::Constant(action_dim, init_log_std)};
}

void GaussianPolicy::set_log_std(const Vec& log_std) {
  require_dim(log_std.size(), action_dim(), "GaussianPolicy::set_log_std");
  if (!log_std.allFinite()) throw NumericalError("GaussianPolicy: non-finite log_std");
  log_std_ = log_std;
}

double GaussianPolicy::log_prob(const Vec& s, const Vec& a) const {
  require_dim(a.size(), action_dim(), "GaussianPolicy::log_prob action");
  Vec mu = mean(s);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    double z = (a[i] - mu[i]) * std::exp(-log_std_[i]);
    lp += -0.5 * z * z - log_std_[i] - kHalfLog2Pi;
  }
  return lp;
}

Vec GaussianPolicy::sample(const Vec& s, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec a = mean(s);
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] += std::exp(log_std_[i]) * normal(rng);
  return a;
}

double GaussianPolicy::entropy() const {
  return (log_std_.array() + 0.5 + kHalfLog2Pi).sum();
}

Vec GaussianPolicy::params() const {
  Vec p(num_params());
  p << mean_net_.params(), log_std_;
  return p;
}

void GaussianPolicy::set_params(const Vec& p) {
  require_dim(p.size(), num_params(), "GaussianPolicy::set_params");
  Eigen::Index n = mean_net_.num_params();
  mean_net_.set_params(p.head(n));
  set_log_std(p.tail(log_std_.size()));
}

double GaussianPolicy::log_prob_with_tape(const Vec& s, const Vec& a, Tape& tape) const {
  require_dim(a.size(), action_dim(), "GaussianPolicy action");
  mean_net_.forward(s, tape);
  const Vec& mu = tape.pre.back();
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double z = (a[i] - mu[i]) * std::exp(-log_std_[i]);
    lp += -0.5 * z * z - log_std_[i] - kHalfLog2Pi;
  }
  return lp;
}

void GaussianPolicy::backward_log_prob(const Tape& tape, const Vec& a, double scale, Vec& grad) const {
  require_dim(grad.size(), num_params(), "GaussianPolicy grad");
  const Vec& mu = tape.pre.back();
  const Eigen::Index n = mean_net_.num_params();
  Vec d_mu(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double inv_var = std::exp(-2.0 * log_std_[i]);
    const double diff = a[i] - mu[i];
    d_mu[i] = scale * diff * inv_var;
    grad[n + i] += scale * (diff * diff * inv_var - 1.0);
  }
  mean_net_.backward(tape, d_mu, grad.head(n));
}

double GaussianPolicy::accumulate_log_prob_grad(const Vec& s, const Vec& a, double scale, Vec& grad) const {
  Tape tape;
  const double lp = log_prob_with_tape(s, a, tape);
  backward_log_prob(tape, a, scale, grad);
  return lp;
}

void GaussianPolicy::accumulate_entropy_grad(double scale, Vec& grad) const {
  require_dim(grad.size(), num_params(), "GaussianPolicy grad");
  grad.tail(log_std_.size()).array() += scale;
}

nlohmann::json GaussianPolicy::to_json() const {
  auto j = mean_net_.to_json();
  j["log_std"] = std::vector<double>(log_std_.data(), log_std_.data() + log_std_.size());
  return j;
}

GaussianPolicy GaussianPolicy::from_json(const nlohmann::json& j) {
  auto net = Mlp::from_json(j);
  auto ls = j.at("log_std").get<std::vector<double>>();
  return {std::move(net), Eigen::Map<const Vec>(ls.data(), static_cast<Eigen::Index>(ls.size()))};
}

}  // namespace polyc::nn
