#include "doctest.h"

#include "polyc/envs/linear.hpp"
#include "polyc/json_util.hpp"
#include "polyc/envs/pendulum.hpp"
#include "polyc/policy/polyc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace polyc;
using namespace polyc::policy;

namespace {

/// Hand-rolled backward recursion, written independently of gae().
std::vector<double> discounted_td_sum(const std::vector<double>& r, const std::vector<double>& v,
                                      const std::vector<double>& v_next, bool terminal, double gamma) {
  const std::size_t n = r.size();
  std::vector<double> delta(n), out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double boot = (t + 1 == n && terminal) ? 0.0 : v_next[t];
    delta[t] = r[t] + gamma * boot - v[t];
  }
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0, g = 1.0;
    for (std::size_t k = t; k < n; ++k, g *= gamma) acc += g * delta[k];
    out[t] = acc;
  }
  return out;
}

envs::LinearSystem stable_linear(int horizon = 50) {
  return envs::LinearSystem(-Mat::Identity(2, 2), Mat::Identity(2, 2), 0.05, Box(2, {-1.0, 1.0}),
                            Box(2, {-1.0, 1.0}), horizon);
}

}  // namespace

TEST_CASE("GAE on a three-step episode") {
  const auto a = gae({1, 0, 2}, {0, 0, 0}, {0, 0, 0}, {false, false, true}, {false, false, true}, 0.9, 1.0);
  REQUIRE(a.size() == 3);
  CHECK(a[0] == doctest::Approx(2.62).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(a[2] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("GAE with lambda = 1 equals the discounted TD-residual sum") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (bool terminal : {true, false}) {
    std::vector<double> r(12), v(12), vn(12);
    for (std::size_t t = 0; t < 12; ++t) {
      r[t] = u(rng);
      v[t] = u(rng);
    }
    for (std::size_t t = 0; t + 1 < 12; ++t) vn[t] = v[t + 1];
    vn[11] = u(rng);
    std::vector<bool> dones(12, false), ends(12, false);
    dones[11] = terminal;
    ends[11] = true;
    const auto a = gae(r, v, vn, dones, ends, 0.97, 1.0);
    const auto ref = discounted_td_sum(r, v, vn, terminal, 0.97);
    for (std::size_t t = 0; t < 12; ++t) CHECK(a[t] == doctest::Approx(ref[t]).epsilon(1e-12));
  }
}

TEST_CASE("GAE resets at episode boundaries") {
  const auto a = gae({1, 1, 1, 1}, {0, 0, 0, 0}, {0, 0, 0, 0}, {false, true, false, true}, {false, true, false, true},
                     0.5, 1.0);
  CHECK(a[0] == doctest::Approx(1.5));
  CHECK(a[1] == doctest::Approx(1.0));
  CHECK(a[2] == doctest::Approx(1.5));
  CHECK(a[3] == doctest::Approx(1.0));
}

TEST_CASE("advantages and return targets of a single terminal transition") {
  TrajectoryBuffer b;
  envs::Transition tr;
  tr.s = Vec::Zero(1);
  tr.s_next = Vec::Zero(1);
  tr.r = 1.0;
  tr.done = true;
  b.transitions = {tr};
  b.values = {0.0};
  b.next_values = {0.0};
  b.episode_end = {true};
  compute_advantages(b, 1.0, 0.95);
  CHECK(b.advantages[0] == 1.0);
  CHECK(b.returns[0] == 1.0);
  TrajectoryBuffer empty;
  CHECK_THROWS(compute_advantages(empty, 0.99, 0.95));
}

TEST_CASE("exact values of a zero-reward chain give zero advantages") {
  // With zero rewards the exact value is zero; a non-terminal cut bootstraps from V = 0.
  const auto a = gae({0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {false, false, false, false},
                     {false, false, false, true}, 0.99, 0.95);
  for (double x : a) CHECK(x == 0.0);
  // Nonzero rewards with values satisfying the Bellman equation.
  const double g = 0.9;
  const std::vector<double> r{1.0, 2.0, 3.0};
  const std::vector<double> v{1.0 + g * (2.0 + g * 3.0), 2.0 + g * 3.0, 3.0};
  const auto b = gae(r, v, {v[1], v[2], 0.0}, {false, false, true}, {false, false, true}, g, 0.7);
  for (double x : b) CHECK(std::abs(x) < 1e-12);
}

TEST_CASE("normalization") {
  const auto z = normalize({1.0, 2.0, 3.0, 4.0});
  CHECK(std::accumulate(z.begin(), z.end(), 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  double sq = 0.0;
  for (double x : z) sq += x * x;
  CHECK(sq / 4.0 == doctest::Approx(1.0));
  for (double x : normalize({5.0, 5.0, 5.0})) CHECK(x == 0.0);
}

TEST_CASE("blended advantage") {
  CHECK(blended_advantage(1.7, 4.0, 0.0) == 1.7);
  CHECK(blended_advantage(0.3, 2.0, 1.0) == -2.0);
  CHECK(blended_advantage(1.0, -3.0, 0.5) == 0.5);
  Rng rng(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0), ub(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double adv = u(rng), lie = u(rng), beta = ub(rng);
    CHECK(blended_advantage(adv, lie, 0.0) == adv);
    if (lie <= 0.0) CHECK(blended_advantage(adv, lie, beta) == (1.0 - beta) * adv);
    CHECK(blended_advantage(adv, lie, beta) <= (1.0 - beta) * adv);
  }
}

TEST_CASE("clipped surrogate") {
  CHECK(ppo_clip_surrogate(1.0, 0.7, 0.2) == 0.7);
  CHECK(ppo_clip_surrogate(1.5, 1.0, 0.2) == doctest::Approx(1.2));
  CHECK(ppo_clip_surrogate(0.5, -1.0, 0.2) == doctest::Approx(-0.8));
  CHECK(ppo_clip_surrogate_dratio(1.5, 1.0, 0.2) == 0.0);
  CHECK(ppo_clip_surrogate_dratio(1.1, 1.0, 0.2) == 1.0);
  CHECK(ppo_clip_surrogate_dratio(0.5, -1.0, 0.2) == 0.0);
  Rng rng(9);
  std::uniform_real_distribution<double> ur(0.01, 3.0), ua(-5.0, 5.0), ue(0.01, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const double r = ur(rng), a = ua(rng), e = ue(rng);
    CHECK(std::abs(ppo_clip_surrogate(r, a, e)) <= std::max(std::abs(r * a), (1.0 + e) * std::abs(a)) + 1e-12);
    const double h = 1e-6;
    const double fd = (ppo_clip_surrogate(r + h, a, e) - ppo_clip_surrogate(r - h, a, e)) / (2 * h);
    if (std::abs(r - 1.0 - e) > 1e-4 && std::abs(r - 1.0 + e) > 1e-4) {
      CHECK(ppo_clip_surrogate_dratio(r, a, e) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("beta Lagrange update") {
  CHECK(beta_lagrange_update(0.3, 0.0, 0.1) == 0.3);
  CHECK(beta_lagrange_update(0.5, 10.0, 0.1) == 0.0);
  CHECK(beta_lagrange_update(0.9, -10.0, 0.1) == 1.0);
  CHECK(beta_lagrange_update(0.5, 1.0, 0.1) == doctest::Approx(0.4));
}

TEST_CASE("clipped objective at the on-policy point equals the plain policy-gradient estimator") {
  Rng rng(12);
  auto policy = nn::GaussianPolicy::make(3, 2, {8}, nn::Activation::tanh, -0.3, rng);
  std::vector<Vec> s, a;
  std::vector<double> lp, adv;
  std::normal_distribution<double> n01;
  for (int i = 0; i < 32; ++i) {
    s.push_back(box_sample(Box(3, {-1.0, 1.0}), rng));
    a.push_back(policy.sample(s.back(), rng));
    lp.push_back(policy.log_prob(s.back(), a.back()));
    adv.push_back(n01(rng));
  }
  std::vector<const Vec*> sp, ap;
  for (int i = 0; i < 32; ++i) {
    sp.push_back(&s[i]);
    ap.push_back(&a[i]);
  }
  Vec grad;
  SurrogateStats stats;
  clipped_objective_grad(policy, sp, ap, lp, adv, 0.2, 0.0, grad, &stats);
  Vec ref = Vec::Zero(policy.num_params());
  for (int i = 0; i < 32; ++i) policy.accumulate_log_prob_grad(s[i], a[i], adv[i] / 32.0, ref);
  CHECK((grad - ref).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(stats.mean_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stats.clip_frac == 0.0);
}

TEST_CASE("clipped objective on a two-armed bandit prefers the rewarded arm") {
  // Arm A is a positive action, arm B a negative one; fixed advantages +1 / -1.
  Rng rng(21);
  auto policy = nn::GaussianPolicy::make(1, 1, {}, nn::Activation::tanh, 0.0, rng);
  nn::Optimizer opt(nn::OptimizerKind::adam, 0.05);
  const Vec state = Vec::Ones(1);
  auto prob_a = [&] {
    const double mu = policy.mean(state)[0];
    const double sd = std::exp(policy.log_std()[0]);
    return 0.5 * std::erfc(-mu / (sd * std::sqrt(2.0)));
  };
  const double p0 = prob_a();
  for (int update = 0; update < 50; ++update) {
    std::vector<Vec> a;
    std::vector<double> lp, adv;
    for (int i = 0; i < 64; ++i) {
      a.push_back(policy.sample(state, rng));
      lp.push_back(policy.log_prob(state, a.back()));
      adv.push_back(a.back()[0] > 0.0 ? 1.0 : -1.0);
    }
    std::vector<const Vec*> sp(64, &state), ap;
    for (auto& x : a) ap.push_back(&x);
    for (int epoch = 0; epoch < 4; ++epoch) {
      Vec grad;
      clipped_objective_grad(policy, sp, ap, lp, adv, 0.2, 0.0, grad);
      Vec p = policy.params();
      opt.step(p, -grad);
      policy.set_params(p);
    }
  }
  MESSAGE("P(A) " << p0 << " -> " << prob_a());
  CHECK(prob_a() > 0.9);
}

TEST_CASE("policy update with zero advantages leaves parameters unchanged") {
  auto env = stable_linear();
  Rng rng(4);
  auto policy = nn::GaussianPolicy::make(2, 2, {8}, nn::Activation::tanh, -0.5, rng);
  nn::Mlp value_net({2, 8, 1}, nn::Activation::tanh);
  auto buf = collect_rollouts(env, policy, value_net, 200, rng);
  buf.advantages.assign(buf.size(), 0.0);
  buf.returns.assign(buf.size(), 0.0);
  const Vec before = policy.params();
  nn::Optimizer opt(nn::OptimizerKind::adam, 3e-4);
  PolicyUpdateConfig cfg;
  cfg.beta = 0.0;
  cfg.epochs = 3;
  const ScalarField critic = [](const Vec& x) { return x.squaredNorm(); };
  const auto diag = policy_update(policy, opt, buf, env, critic, cfg, rng);
  CHECK(policy.params() == before);
  CHECK(diag.surrogate == 0.0);
  CHECK(diag.mean_ratio == doctest::Approx(1.0));
}

TEST_CASE("pure Lyapunov weighting on a stable system adds no bias") {
  // x_dot = -x + u with a zero-mean policy and V = |x|^2: every Lie derivative is negative.
  auto env = stable_linear();
  Rng rng(5);
  nn::Mlp mean_net({2, 2}, nn::Activation::tanh);
  nn::GaussianPolicy policy(mean_net, Vec::Constant(2, -2.0));
  nn::Mlp value_net({2, 4, 1}, nn::Activation::tanh);
  auto buf = collect_rollouts(env, policy, value_net, 256, rng);
  compute_advantages(buf, 0.99, 0.95);
  const Vec before = policy.params();
  nn::Optimizer opt(nn::OptimizerKind::adam, 3e-4);
  PolicyUpdateConfig cfg;
  cfg.beta = 1.0;
  cfg.epochs = 2;
  const ScalarField critic = [](const Vec& x) { return x.squaredNorm(); };
  const auto diag = policy_update(policy, opt, buf, env, critic, cfg, rng);
  CHECK(diag.mean_lie < 0.0);
  CHECK(diag.surrogate == 0.0);
  CHECK(policy.params() == before);
}

TEST_CASE("value regression to a constant target") {
  Rng rng(6);
  nn::Mlp net = nn::Mlp::glorot({2, 16, 1}, nn::Activation::tanh, rng);
  std::vector<Vec> s;
  for (int i = 0; i < 64; ++i) s.push_back(box_sample(Box(2, {-1.0, 1.0}), rng));
  std::vector<const Vec*> sp;
  for (auto& x : s) sp.push_back(&x);
  const std::vector<double> targets(64, 1.5);
  nn::Optimizer opt(nn::OptimizerKind::adam, 1e-2);
  for (int step = 0; step < 200; ++step) value_regression_step(net, sp, targets, opt);
  // The fitted mean reaches the constant quickly; flattening the input dependence is slower.
  double mean = 0.0, sq = 0.0;
  for (auto& x : s) {
    mean += net.value(x) / 64.0;
    sq += (net.value(x) - 1.5) * (net.value(x) - 1.5) / 64.0;
  }
  MESSAGE("mean " << mean << ", rms error " << std::sqrt(sq));
  CHECK(std::abs(mean - 1.5) < 1e-2);
  CHECK(std::sqrt(sq) < 2e-2);

  // Matched targets give a zero gradient.
  std::vector<double> matched;
  for (auto& x : s) matched.push_back(net.value(x));
  const Vec p = net.params();
  nn::Optimizer sgd(nn::OptimizerKind::sgd, 0.1);
  CHECK(value_regression_step(net, sp, matched, sgd) == 0.0);
  CHECK(net.params() == p);
}

TEST_CASE("full-batch value regression decreases the loss monotonically") {
  Rng rng(7);
  nn::Mlp net = nn::Mlp::glorot({2, 16, 1}, nn::Activation::tanh, rng);
  std::vector<Vec> s;
  std::vector<double> t;
  for (int i = 0; i < 64; ++i) {
    s.push_back(box_sample(Box(2, {-1.0, 1.0}), rng));
    t.push_back(std::sin(2.0 * s.back()[0]) + s.back()[1]);
  }
  std::vector<const Vec*> sp;
  for (auto& x : s) sp.push_back(&x);
  nn::Optimizer opt(nn::OptimizerKind::sgd, 1e-2);
  double prev = value_loss(net, sp, t);
  for (int step = 0; step < 300; ++step) {
    value_regression_step(net, sp, t, opt);
    const double now = value_loss(net, sp, t);
    CHECK(now <= prev);
    prev = now;
  }
}

TEST_CASE("rollouts on a horizon-one environment are one-step episodes") {
  auto env = stable_linear(1);
  Rng rng(2);
  auto policy = nn::GaussianPolicy::make(2, 2, {4}, nn::Activation::tanh, -0.5, rng);
  nn::Mlp value_net({2, 4, 1}, nn::Activation::tanh);
  const auto buf = collect_rollouts(env, policy, value_net, 3, rng);
  CHECK(buf.size() == 3);
  CHECK(buf.episode_starts == std::vector<std::size_t>{0, 1, 2});
  CHECK(buf.episode_end == std::vector<bool>{true, true, true});
  CHECK(buf.episode_complete == std::vector<bool>{true, true, true});
}

TEST_CASE("rollout caches match the generating policy and are reproducible") {
  envs::Pendulum env;
  Rng init(1);
  auto policy = nn::GaussianPolicy::make(2, 1, {16}, nn::Activation::tanh, -0.5, init);
  auto value_net = nn::Mlp::glorot({2, 16, 1}, nn::Activation::tanh, init);
  Rng r1(42), r2(42);
  const auto a = collect_rollouts(env, policy, value_net, 2048, r1);
  const auto b = collect_rollouts(env, policy, value_net, 2048, r2);
  REQUIRE(a.size() == 2048);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.transitions[i].s == b.transitions[i].s);
    CHECK(a.log_prob_old[i] == b.log_prob_old[i]);
    // On-policy ratio identity.
    CHECK(std::exp(policy.log_prob(a.transitions[i].s, a.policy_actions[i]) - a.log_prob_old[i]) == 1.0);
    CHECK(a.values[i] == value_net.value(a.transitions[i].s));
  }
  CHECK_FALSE(a.episode_complete.back());

  // Independent scripted rollout with the same seed: per-episode theta ranges agree.
  Rng r3(42);
  std::vector<std::pair<double, double>> ranges;
  envs::EpisodeClock clock;
  std::size_t count = 0;
  while (count < 2048) {
    Vec s = env.reset(r3, clock);
    double lo = s[0], hi = s[0];
    while (count < 2048) {
      const Vec u = env.to_physical_action(policy.sample(s, r3));
      const auto res = env.step(s, u, clock);
      lo = std::min(lo, s[0]);
      hi = std::max(hi, s[0]);
      s = res.next;
      ++count;
      if (res.done || clock.steps >= env.horizon()) break;
    }
    ranges.emplace_back(lo, hi);
  }
  REQUIRE(ranges.size() == a.episode_starts.size());
  for (std::size_t e = 0; e < ranges.size(); ++e) {
    const std::size_t first = a.episode_starts[e];
    const std::size_t last = e + 1 < ranges.size() ? a.episode_starts[e + 1] : a.size();
    double lo = a.transitions[first].s[0], hi = lo;
    for (std::size_t i = first; i < last; ++i) {
      lo = std::min(lo, a.transitions[i].s[0]);
      hi = std::max(hi, a.transitions[i].s[0]);
    }
    CHECK(lo == ranges[e].first);
    CHECK(hi == ranges[e].second);
  }
}

TEST_CASE("training with zero iterations returns the initialized agent") {
  auto env = stable_linear();
  PolycConfig cfg;
  cfg.total_iters = 0;
  CriticConfig ccfg;
  const auto res = polyc_train(env, cfg, ccfg, 3);
  CHECK(res.metrics.empty());
  Rng rng(3);
  const auto fresh = init_agent(env, cfg, ccfg, rng);
  CHECK(res.agent.policy.params() == fresh.policy.params());
  CHECK(res.agent.critic.net.params() == fresh.critic.net.params());
  CHECK(res.agent.iter == 0);
}

TEST_CASE("training is deterministic for a fixed seed") {
  auto env = stable_linear();
  PolycConfig cfg;
  cfg.total_iters = 3;
  cfg.steps_per_iter = 256;
  cfg.epochs_per_iter = 2;
  cfg.hidden = {16};
  CriticConfig ccfg;
  ccfg.hidden = {16};
  ccfg.minibatches = 5;
  auto csv = [&](std::uint64_t seed) {
    std::string out = metrics_csv_header();
    int calls = 0;
    TrainHooks hooks;
    hooks.on_iteration = [&](const Agent&, const IterationMetrics&) { ++calls; };
    for (const auto& m : polyc_train(env, cfg, ccfg, seed, hooks).metrics) out += metrics_csv_row(m);
    CHECK(calls == 3);
    return out;
  };
  const auto a = csv(9);
  CHECK(a == csv(9));
  CHECK(a != csv(10));
}

TEST_CASE("configuration ranges are validated") {
  PolycConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.beta = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = PolycConfig{};
  cfg.gamma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(PolycConfig::from_json({{"gama", 0.9}}), ConfigError);
  const auto back = PolycConfig::from_json(PolycConfig{}.to_json());
  CHECK(back.to_json() == PolycConfig{}.to_json());
  CHECK_THROWS_AS(CriticConfig::from_json({{"lie_resample", "bogus"}}), ConfigError);
}
