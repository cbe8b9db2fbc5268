#include "polyc/policy/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace polyc::policy {

double clipped_objective_grad(const nn::GaussianPolicy& policy, const std::vector<const Vec*>& states,
                              const std::vector<const Vec*>& actions, const std::vector<double>& log_prob_old,
                              const std::vector<double>& adv, double clip_eps, double entropy_coef, Vec& grad,
                              SurrogateStats* stats) {
  const auto n = states.size();
  if (n == 0) throw std::invalid_argument("clipped_objective_grad: empty minibatch");
  if (actions.size() != n || log_prob_old.size() != n || adv.size() != n) {
    throw DimensionError("clipped_objective_grad: minibatch lengths differ");
  }
  grad = Vec::Zero(policy.num_params());
  const double inv_n = 1.0 / static_cast<double>(n);
  nn::Tape tape;
  double surrogate = 0.0;
  double ratio_sum = 0.0;
  int clipped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto eval = policy.log_prob_with_tape(*states[i], *actions[i], tape);
    const double ratio = std::exp(eval - log_prob_old[i]);
    surrogate += ppo_clip_surrogate(ratio, adv[i], clip_eps);
    ratio_sum += ratio;
    if (std::abs(ratio - 1.0) > clip_eps) ++clipped;
    const double d_ratio = ppo_clip_surrogate_dratio(ratio, adv[i], clip_eps);
    if (d_ratio != 0.0) {
      // d ratio / d phi = ratio * d log pi / d phi
      policy.backward_log_prob(tape, *actions[i], d_ratio * ratio * inv_n, grad);
    }
  }
  surrogate *= inv_n;
  if (entropy_coef != 0.0) policy.accumulate_entropy_grad(entropy_coef, grad);
  if (stats != nullptr) {
    stats->mean_ratio = ratio_sum * inv_n;
    stats->clip_frac = clipped * inv_n;
    stats->surrogate = surrogate;
  }
  return surrogate + entropy_coef * policy.entropy();
}

double lie_under_policy(const envs::Env& env, const ScalarField& critic, const nn::GaussianPolicy& policy,
                        const envs::Transition& tr) {
  auto clock = tr.clock;
  const Vec next = env.step(tr.s, env.to_physical_action(policy.mean(tr.s)), clock).next;
  return (critic(next) - critic(tr.s)) / env.dt();
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

/// Runs `epoch` with rollback: on failure restore `params`/optimizer, halve the
/// learning rate once and retry.
template <typename Params, typename Restore, typename Epoch>
bool run_with_rollback(nn::Optimizer& opt, const Params& saved, Restore restore, Epoch epoch, bool& halved,
                       const char* what) {
  const nn::Optimizer saved_opt = opt;
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      if (epoch()) return true;
    } catch (const NumericalError&) {
    }
    restore(saved);
    opt = saved_opt;
    if (halved || attempt == 1) break;
    opt.set_learning_rate(opt.learning_rate() * 0.5);
    halved = true;
  }
  throw TrainingError(std::string(what) + ": non-finite loss after learning-rate halving");
}

}  // namespace

PolicyUpdateDiagnostics policy_update(nn::GaussianPolicy& policy, nn::Optimizer& opt, const TrajectoryBuffer& buffer,
                                      const envs::Env& env, const ScalarField& critic, const PolicyUpdateConfig& cfg,
                                      Rng& rng) {
  if (buffer.empty() || buffer.advantages.size() != buffer.size()) {
    throw std::invalid_argument("policy_update: advantages not computed");
  }
  const std::vector<double> reward_adv =
      cfg.normalize_advantages ? normalize(buffer.advantages) : buffer.advantages;
  const std::size_t mb = std::max<std::size_t>(1, std::min(cfg.minibatch_size, buffer.size()));

  // The critic is fixed during the update, so V(s) is computed once.
  const bool stored = cfg.lie_resample == lyapunov::LieResample::stored;
  std::vector<double> critic_at_s, stored_lie;
  if (critic) {
    critic_at_s.reserve(buffer.size());
    for (const auto& tr : buffer.transitions) critic_at_s.push_back(critic(tr.s));
    if (stored) {
      stored_lie.reserve(buffer.size());
      for (std::size_t i = 0; i < buffer.size(); ++i) {
        stored_lie.push_back((critic(buffer.transitions[i].s_next) - critic_at_s[i]) / buffer.transitions[i].dt);
      }
    }
  }

  PolicyUpdateDiagnostics diag;
  std::vector<const Vec*> states, actions;
  std::vector<double> logp_old, adv;
  Vec grad;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Vec saved = policy.params();
    double ratio_acc = 0.0, clip_acc = 0.0, lie_acc = 0.0, surr_acc = 0.0;
    std::size_t count = 0;
    auto run_epoch = [&]() -> bool {
      ratio_acc = clip_acc = lie_acc = surr_acc = 0.0;
      count = 0;
      const auto order = shuffled_indices(buffer.size(), rng);
      for (std::size_t start = 0; start < order.size(); start += mb) {
        const std::size_t end = std::min(order.size(), start + mb);
        states.clear();
        actions.clear();
        logp_old.clear();
        adv.clear();
        for (std::size_t k = start; k < end; ++k) {
          const auto i = order[k];
          const auto& tr = buffer.transitions[i];
          double lie = 0.0;
          if (critic && stored) {
            lie = stored_lie[i];
          } else if (critic) {
            auto clock = tr.clock;
            const Vec next = env.step(tr.s, env.to_physical_action(policy.mean(tr.s)), clock).next;
            lie = (critic(next) - critic_at_s[i]) / env.dt();
          }
          lie_acc += lie;
          states.push_back(&tr.s);
          actions.push_back(&buffer.policy_actions[i]);
          logp_old.push_back(buffer.log_prob_old[i]);
          adv.push_back(blended_advantage(reward_adv[i], lie, cfg.beta));
        }
        SurrogateStats stats;
        const double obj =
            clipped_objective_grad(policy, states, actions, logp_old, adv, cfg.clip_eps, cfg.entropy_coef, grad, &stats);
        if (!std::isfinite(obj) || !grad.allFinite()) return false;
        const double w = static_cast<double>(end - start);
        ratio_acc += stats.mean_ratio * w;
        clip_acc += stats.clip_frac * w;
        surr_acc += stats.surrogate * w;
        count += end - start;
        Vec params = policy.params();
        Vec descent = -grad;
        opt.step(params, descent);
        policy.set_params(params);
      }
      return true;
    };
    run_with_rollback(opt, saved, [&](const Vec& p) { policy.set_params(p); }, run_epoch, diag.lr_halved,
                      "policy_update");
    const double n = static_cast<double>(count);
    diag.mean_ratio = ratio_acc / n;
    diag.clip_frac = clip_acc / n;
    diag.mean_lie = lie_acc / n;
    diag.surrogate = surr_acc / n;
  }
  diag.entropy = policy.entropy();
  return diag;
}

double value_loss(const nn::Mlp& value_net, const std::vector<const Vec*>& states, const std::vector<double>& targets) {
  if (states.empty() || states.size() != targets.size()) throw DimensionError("value_loss: bad minibatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double e = value_net.value(*states[i]) - targets[i];
    loss += e * e;
  }
  return loss / static_cast<double>(states.size());
}

double value_regression_step(nn::Mlp& value_net, const std::vector<const Vec*>& states,
                             const std::vector<double>& targets, nn::Optimizer& opt) {
  if (states.empty() || states.size() != targets.size()) {
    throw DimensionError("value_regression_step: bad minibatch");
  }
  const double inv_n = 1.0 / static_cast<double>(states.size());
  Vec grad = Vec::Zero(value_net.num_params());
  nn::Tape tape;
  Vec up(1);
  double loss = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double e = value_net.forward(*states[i], tape)[0] - targets[i];
    loss += e * e;
    up[0] = 2.0 * e * inv_n;
    value_net.backward(tape, up, grad);
  }
  loss *= inv_n;
  if (!std::isfinite(loss)) throw NumericalError("value_regression_step: non-finite loss");
  Vec params = value_net.params();
  opt.step(params, grad);
  value_net.set_params(params);
  return loss;
}

double value_update(nn::Mlp& value_net, nn::Optimizer& opt, const TrajectoryBuffer& buffer, int epochs,
                    std::size_t minibatch_size, Rng& rng) {
  if (buffer.empty() || buffer.returns.size() != buffer.size()) {
    throw std::invalid_argument("value_update: return targets not computed");
  }
  const std::size_t mb = std::max<std::size_t>(1, std::min(minibatch_size, buffer.size()));
  std::vector<const Vec*> states;
  std::vector<double> targets;
  bool halved = false;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const Vec saved = value_net.params();
    auto run_epoch = [&]() -> bool {
      const auto order = shuffled_indices(buffer.size(), rng);
      for (std::size_t start = 0; start < order.size(); start += mb) {
        states.clear();
        targets.clear();
        for (std::size_t k = start; k < std::min(order.size(), start + mb); ++k) {
          states.push_back(&buffer.transitions[order[k]].s);
          targets.push_back(buffer.returns[order[k]]);
        }
        value_regression_step(value_net, states, targets, opt);
      }
      return true;
    };
    run_with_rollback(opt, saved, [&](const Vec& p) { value_net.set_params(p); }, run_epoch, halved, "value_update");
  }
  states.clear();
  for (const auto& tr : buffer.transitions) states.push_back(&tr.s);
  return value_loss(value_net, states, buffer.returns);
}

}  // namespace polyc::policy
