#include "polyc/lyapunov/critic.hpp"

#include "polyc/json_util.hpp"

#include <cmath>
#include <limits>

namespace polyc::lyapunov {

LyapunovCritic LyapunovCritic::make(int state_dim, const std::vector<int>& hidden, nn::Activation act, Vec origin,
                                    Rng& rng) {
  require_dim(origin.size(), state_dim, "LyapunovCritic origin");
  std::vector<int> widths{state_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  return {nn::Mlp::glorot(widths, act, rng), std::move(origin), 0.0};
}

nlohmann::json LyapunovCritic::to_json() const {
  auto j = net.to_json();
  j["kind"] = "mlp";
  j["origin"] = vec_to_json(origin);
  j["margin"] = margin;
  return j;
}

LyapunovCritic LyapunovCritic::from_json(const nlohmann::json& j) {
  LyapunovCritic c{nn::Mlp::from_json(j), vec_from_json(j.at("origin")), get_or(j, "margin", 0.0)};
  require_dim(c.origin.size(), c.net.input_dim(), "LyapunovCritic origin");
  if (c.net.output_dim() != 1) throw DimensionError("LyapunovCritic: network must have scalar output");
  return c;
}

double sampled_lie_derivative(const std::function<double(const Vec&)>& v, const Vec& s, const Vec& s_next,
                              double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sampled_lie_derivative: dt must be positive");
  return (v(s_next) - v(s)) / dt;
}

double sampled_lie_derivative(const LyapunovCritic& v, const Vec& s, const Vec& s_next, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sampled_lie_derivative: dt must be positive");
  return (v.value(s_next) - v.value(s)) / dt;
}

namespace {

void check_batch(const RiskBatch& batch) {
  if (batch.states.empty()) throw std::invalid_argument("lyapunov_risk: empty batch");
  if (batch.states.size() != batch.next_states.size()) {
    throw DimensionError("lyapunov_risk: states and next_states differ in length");
  }
  if (!(batch.dt > 0.0)) throw std::invalid_argument("lyapunov_risk: dt must be positive");
}

double positivity_target(const LyapunovCritic& v, const Vec& s) {
  return v.margin > 0.0 ? v.margin * (s - v.origin).norm() : 0.0;
}

}  // namespace

double lyapunov_risk(const ScalarField& v, const Vec& origin, const RiskBatch& batch, double margin) {
  check_batch(batch);
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double vs = v(batch.states[i]);
    const double lie = (v(batch.next_states[i]) - vs) / batch.dt;
    const double target = margin > 0.0 ? margin * (batch.states[i] - origin).norm() : 0.0;
    if (!std::isfinite(lie) || !std::isfinite(vs)) return std::numeric_limits<double>::quiet_NaN();
    sum += std::max(target - vs, 0.0) + std::max(0.0, lie);
  }
  const double v0 = v(origin);
  return sum / static_cast<double>(batch.size()) + v0 * v0;
}

double lyapunov_risk(const LyapunovCritic& v, const RiskBatch& batch) {
  return lyapunov_risk([&v](const Vec& s) { return v.value(s); }, v.origin, batch, v.margin);
}

double lyapunov_risk_grad(const LyapunovCritic& v, const RiskBatch& batch, Vec& grad) {
  check_batch(batch);
  grad = Vec::Zero(v.net.num_params());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  nn::Tape tape_s, tape_n;
  Vec up(1);
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double vs = v.net.forward(batch.states[i], tape_s)[0];
    const double vn = v.net.forward(batch.next_states[i], tape_n)[0];
    const double lie = (vn - vs) / batch.dt;
    const double pos = positivity_target(v, batch.states[i]) - vs;
    if (!std::isfinite(lie) || !std::isfinite(pos)) {
      sum = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double d_vs = 0.0;
    double d_vn = 0.0;
    if (pos > 0.0) {
      sum += pos;
      d_vs -= inv_n;
    }
    if (lie > 0.0) {
      sum += lie;
      d_vs -= inv_n / batch.dt;
      d_vn += inv_n / batch.dt;
    }
    if (d_vs != 0.0) {
      up[0] = d_vs;
      v.net.backward(tape_s, up, grad);
    }
    if (d_vn != 0.0) {
      up[0] = d_vn;
      v.net.backward(tape_n, up, grad);
    }
  }
  nn::Tape tape_o;
  const double v0 = v.net.forward(v.origin, tape_o)[0];
  if (v0 != 0.0) {
    up[0] = 2.0 * v0;
    v.net.backward(tape_o, up, grad);
  }
  return sum * inv_n + v0 * v0;
}

LieResample lie_resample_from_string(const std::string& s) {
  if (s == "stored") return LieResample::stored;
  if (s == "mean-action") return LieResample::mean_action;
  throw ConfigError("unknown lie_resample mode '" + s + "'");
}

std::string to_string(LieResample m) { return m == LieResample::stored ? "stored" : "mean-action"; }

RiskBatch make_risk_batch(const std::vector<envs::Transition>& transitions, const envs::Env& env,
                          const ActionFn& mean_action, LieResample mode) {
  RiskBatch batch;
  batch.dt = env.dt();
  batch.states.reserve(transitions.size());
  batch.next_states.reserve(transitions.size());
  for (const auto& tr : transitions) {
    batch.states.push_back(tr.s);
    if (mode == LieResample::stored) {
      batch.next_states.push_back(tr.s_next);
    } else {
      auto clock = tr.clock;
      batch.next_states.push_back(env.step(tr.s, mean_action(tr.s), clock).next);
    }
  }
  return batch;
}

CriticTrainResult critic_train_step(LyapunovCritic& v, const RiskBatch& pairs, nn::Optimizer& opt,
                                    std::size_t batch_size, int minibatches, Rng& rng) {
  check_batch(pairs);
  if (batch_size == 0) throw std::invalid_argument("critic_train_step: batch size must be positive");
  CriticTrainResult result;
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  RiskBatch mb;
  mb.dt = pairs.dt;
  mb.states.resize(batch_size);
  mb.next_states.resize(batch_size);
  Vec grad;
  for (int step = 0; step < minibatches; ++step) {
    for (std::size_t i = 0; i < batch_size; ++i) {
      const auto k = pick(rng);
      mb.states[i] = pairs.states[k];
      mb.next_states[i] = pairs.next_states[k];
    }
    const double risk = lyapunov_risk_grad(v, mb, grad);
    if (!std::isfinite(risk) || !grad.allFinite()) {
      result.aborted = true;
      break;
    }
    Vec params = v.net.params();
    try {
      opt.step(params, grad);
      v.net.set_params(params);
    } catch (const NumericalError&) {
      result.aborted = true;
      break;
    }
    ++result.steps_taken;
  }
  result.risk = lyapunov_risk(v, pairs);
  return result;
}

}  // namespace polyc::lyapunov
