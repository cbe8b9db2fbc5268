#include "polyc/policy/polyc.hpp"

#include "polyc/json_util.hpp"

#include <cmath>
#include <cstdio>

namespace polyc::policy {

void PolycConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("algo.gamma must be in (0, 1]");
  if (!(lambda_gae >= 0.0 && lambda_gae <= 1.0)) throw ConfigError("algo.lambda_gae must be in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("algo.beta must be in [0, 1]");
  if (!(clip_eps > 0.0)) throw ConfigError("algo.clip_eps must be positive");
  if (!(entropy_coef >= 0.0)) throw ConfigError("algo.entropy_coef must be nonnegative");
  if (epochs_per_iter < 0 || total_iters < 0) throw ConfigError("algo epochs/iters must be nonnegative");
  if (minibatch_size == 0 || steps_per_iter == 0) throw ConfigError("algo minibatch_size/steps_per_iter must be positive");
  if (!(alpha_beta > 0.0)) throw ConfigError("algo.alpha_beta must be positive");
  if (!(policy_lr > 0.0) || !(value_lr > 0.0)) throw ConfigError("algo learning rates must be positive");
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("algo.hidden widths must be positive");
  }
}

nlohmann::json PolycConfig::to_json() const {
  return {{"gamma", gamma},
          {"lambda_gae", lambda_gae},
          {"beta", beta},
          {"clip_eps", clip_eps},
          {"entropy_coef", entropy_coef},
          {"epochs_per_iter", epochs_per_iter},
          {"minibatch_size", minibatch_size},
          {"steps_per_iter", steps_per_iter},
          {"total_iters", total_iters},
          {"beta_lagrange", beta_lagrange},
          {"alpha_beta", alpha_beta},
          {"normalize_advantages", normalize_advantages},
          {"policy_lr", policy_lr},
          {"value_lr", value_lr},
          {"hidden", hidden},
          {"activation", nn::to_string(activation)},
          {"init_log_std", init_log_std}};
}

PolycConfig PolycConfig::from_json(const nlohmann::json& j) {
  check_keys(j, {"gamma", "lambda_gae", "beta", "clip_eps", "entropy_coef", "epochs_per_iter", "minibatch_size",
                 "steps_per_iter", "total_iters", "beta_lagrange", "alpha_beta", "normalize_advantages", "policy_lr",
                 "value_lr", "hidden", "activation", "init_log_std"},
             "algo");
  PolycConfig c;
  c.gamma = get_or(j, "gamma", c.gamma);
  c.lambda_gae = get_or(j, "lambda_gae", c.lambda_gae);
  c.beta = get_or(j, "beta", c.beta);
  c.clip_eps = get_or(j, "clip_eps", c.clip_eps);
  c.entropy_coef = get_or(j, "entropy_coef", c.entropy_coef);
  c.epochs_per_iter = get_or(j, "epochs_per_iter", c.epochs_per_iter);
  c.minibatch_size = get_or(j, "minibatch_size", c.minibatch_size);
  c.steps_per_iter = get_or(j, "steps_per_iter", c.steps_per_iter);
  c.total_iters = get_or(j, "total_iters", c.total_iters);
  c.beta_lagrange = get_or(j, "beta_lagrange", c.beta_lagrange);
  c.alpha_beta = get_or(j, "alpha_beta", c.alpha_beta);
  c.normalize_advantages = get_or(j, "normalize_advantages", c.normalize_advantages);
  c.policy_lr = get_or(j, "policy_lr", c.policy_lr);
  c.value_lr = get_or(j, "value_lr", c.value_lr);
  c.hidden = get_or(j, "hidden", c.hidden);
  if (j.contains("activation")) c.activation = nn::activation_from_string(j.at("activation").get<std::string>());
  c.init_log_std = get_or(j, "init_log_std", c.init_log_std);
  c.validate();
  return c;
}

void CriticConfig::validate() const {
  if (batch_size == 0 || minibatches < 0) throw ConfigError("critic batch_size must be positive, minibatches >= 0");
  if (!(lr > 0.0)) throw ConfigError("critic.lr must be positive");
  if (!(margin >= 0.0)) throw ConfigError("critic.margin must be nonnegative");
  if (persist_capacity == 0) throw ConfigError("critic.persist_capacity must be positive");
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("critic.hidden widths must be positive");
  }
}

nlohmann::json CriticConfig::to_json() const {
  return {{"batch_size", batch_size},
          {"minibatches", minibatches},
          {"lr", lr},
          {"lie_resample", lyapunov::to_string(lie_resample)},
          {"margin", margin},
          {"persist_buffer", persist_buffer},
          {"persist_capacity", persist_capacity},
          {"hidden", hidden},
          {"activation", nn::to_string(activation)}};
}

CriticConfig CriticConfig::from_json(const nlohmann::json& j) {
  check_keys(j, {"batch_size", "minibatches", "lr", "lie_resample", "margin", "persist_buffer", "persist_capacity",
                 "hidden", "activation"},
             "critic");
  CriticConfig c;
  c.batch_size = get_or(j, "batch_size", c.batch_size);
  c.minibatches = get_or(j, "minibatches", c.minibatches);
  c.lr = get_or(j, "lr", c.lr);
  if (j.contains("lie_resample")) c.lie_resample = lyapunov::lie_resample_from_string(j.at("lie_resample"));
  c.margin = get_or(j, "margin", c.margin);
  c.persist_buffer = get_or(j, "persist_buffer", c.persist_buffer);
  c.persist_capacity = get_or(j, "persist_capacity", c.persist_capacity);
  c.hidden = get_or(j, "hidden", c.hidden);
  if (j.contains("activation")) c.activation = nn::activation_from_string(j.at("activation").get<std::string>());
  c.validate();
  return c;
}

std::string metrics_csv_header() { return "iter,mean_return,lyapunov_risk,mean_lie,clip_frac,beta,entropy"; }

std::string metrics_csv_row(const IterationMetrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", m.iter, m.mean_return, m.lyapunov_risk,
                m.mean_lie, m.clip_frac, m.beta, m.entropy);
  return buf;
}

Vec mean_action(const envs::Env& env, const nn::GaussianPolicy& policy, const Vec& s) {
  return env.to_physical_action(policy.mean(s));
}

Agent init_agent(const envs::Env& env, const PolycConfig& cfg, const CriticConfig& critic_cfg, Rng& rng) {
  Agent agent;
  agent.policy = nn::GaussianPolicy::make(env.state_dim(), env.action_dim(), cfg.hidden, cfg.activation,
                                          cfg.init_log_std, rng);
  std::vector<int> vw{env.state_dim()};
  vw.insert(vw.end(), cfg.hidden.begin(), cfg.hidden.end());
  vw.push_back(1);
  agent.value_net = nn::Mlp::glorot(vw, cfg.activation, rng);
  agent.critic = lyapunov::LyapunovCritic::make(env.state_dim(), critic_cfg.hidden, critic_cfg.activation,
                                                env.equilibrium(), rng);
  agent.critic.margin = critic_cfg.margin;
  agent.beta = cfg.beta;
  return agent;
}

TrainResult polyc_train(const envs::Env& env, const PolycConfig& cfg, const CriticConfig& critic_cfg,
                        std::uint64_t seed, const TrainHooks& hooks) {
  cfg.validate();
  critic_cfg.validate();
  Rng rng(seed);
  TrainResult result;
  Agent& agent = result.agent;
  agent = init_agent(env, cfg, critic_cfg, rng);

  nn::Optimizer policy_opt(nn::OptimizerKind::adam, cfg.policy_lr);
  nn::Optimizer value_opt(nn::OptimizerKind::adam, cfg.value_lr);
  nn::Optimizer critic_opt(nn::OptimizerKind::adam, critic_cfg.lr);
  std::vector<envs::Transition> persisted;

  for (int iter = 1; iter <= cfg.total_iters; ++iter) {
    TrajectoryBuffer buffer = collect_rollouts(env, agent.policy, agent.value_net, cfg.steps_per_iter, rng);

    // Critic: pairs follow the latest policy.
    const std::vector<envs::Transition>* critic_source = &buffer.transitions;
    if (critic_cfg.persist_buffer) {
      persisted.insert(persisted.end(), buffer.transitions.begin(), buffer.transitions.end());
      if (persisted.size() > critic_cfg.persist_capacity) {
        persisted.erase(persisted.begin(),
                        persisted.begin() + static_cast<std::ptrdiff_t>(persisted.size() - critic_cfg.persist_capacity));
      }
      critic_source = &persisted;
    }
    const auto act = [&](const Vec& s) { return mean_action(env, agent.policy, s); };
    const auto pairs = lyapunov::make_risk_batch(*critic_source, env, act, critic_cfg.lie_resample);
    const auto critic_res =
        lyapunov::critic_train_step(agent.critic, pairs, critic_opt, critic_cfg.batch_size, critic_cfg.minibatches, rng);
    if (critic_res.aborted) {
      throw TrainingError("critic_train_step: non-finite risk or gradient at iteration " + std::to_string(iter));
    }

    compute_advantages(buffer, cfg.gamma, cfg.lambda_gae);

    PolicyUpdateConfig pu;
    pu.beta = agent.beta;
    pu.clip_eps = cfg.clip_eps;
    pu.entropy_coef = cfg.entropy_coef;
    pu.epochs = cfg.epochs_per_iter;
    pu.minibatch_size = cfg.minibatch_size;
    pu.normalize_advantages = cfg.normalize_advantages;
    pu.lie_resample = critic_cfg.lie_resample;
    const auto& critic = agent.critic;
    const ScalarField critic_fn = [&critic](const Vec& s) { return critic.value(s); };
    const auto diag = policy_update(agent.policy, policy_opt, buffer, env, critic_fn, pu, rng);
    value_update(agent.value_net, value_opt, buffer, cfg.epochs_per_iter, cfg.minibatch_size, rng);

    if (cfg.beta_lagrange) agent.beta = beta_lagrange_update(agent.beta, diag.mean_lie, cfg.alpha_beta);
    agent.iter = iter;

    IterationMetrics m;
    m.iter = iter;
    m.mean_return = buffer.mean_episode_return();
    m.lyapunov_risk = critic_res.risk;
    m.mean_lie = diag.mean_lie;
    m.clip_frac = diag.clip_frac;
    m.beta = agent.beta;
    m.entropy = diag.entropy;
    result.metrics.push_back(m);
    if (hooks.on_iteration) hooks.on_iteration(agent, m);
  }
  return result;
}

}  // namespace polyc::policy
