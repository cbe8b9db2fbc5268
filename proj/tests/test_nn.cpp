#include "doctest.h"
#include "support.hpp"

#include "polyc/nn/gaussian_policy.hpp"
#include "polyc/nn/mlp.hpp"
#include "polyc/nn/optimizer.hpp"

#include <cmath>
#include <numbers>

using namespace polyc;
using namespace polyc::nn;
using testsupport::central_diff;
using testsupport::grad_close;

namespace {

/// Straight-line forward pass reading the serialized (row-major) weights.
std::vector<double> reference_forward(const nlohmann::json& j, std::vector<double> x) {
  const auto& ws = j.at("weights");
  const auto& bs = j.at("biases");
  const bool relu = j.at("activation") == "relu";
  for (std::size_t l = 0; l < ws.size(); ++l) {
    std::vector<double> y;
    for (std::size_t r = 0; r < ws[l].size(); ++r) {
      double acc = bs[l][r].get<double>();
      for (std::size_t c = 0; c < x.size(); ++c) acc += ws[l][r][c].get<double>() * x[c];
      if (l + 1 < ws.size()) acc = relu ? std::max(acc, 0.0) : std::tanh(acc);
      y.push_back(acc);
    }
    x = y;
  }
  return x;
}

Vec random_vec(Eigen::Index n, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

TEST_CASE("forward of a zero-initialized network is zero") {
  Mlp net({3, 5, 2}, Activation::tanh);
  CHECK(net.forward(Vec::Constant(3, 0.7)).isZero(0.0));
}

TEST_CASE("single affine layer") {
  Mlp net({1, 1}, Activation::tanh);
  net.weight(0)(0, 0) = 2.0;
  net.bias(0)[0] = 1.0;
  CHECK(net.forward(Vec::Constant(1, 3.0))[0] == doctest::Approx(7.0));
}

TEST_CASE("forward matches a hand-rolled reference pass") {
  for (auto act : {Activation::tanh, Activation::relu}) {
    Rng rng(7);
    auto net = Mlp::glorot({2, 16, 1}, act, rng);
    const auto ref = reference_forward(net.to_json(), {0.5, -0.5});
    CHECK(net.forward(Vec{{0.5, -0.5}})[0] == doctest::Approx(ref[0]).epsilon(1e-14));
    Rng rng2(11);
    auto deep = Mlp::glorot({4, 8, 8, 3}, act, rng2);
    const Vec x{{0.3, -1.2, 0.8, 0.1}};
    const auto ref2 = reference_forward(deep.to_json(), {0.3, -1.2, 0.8, 0.1});
    const Vec y = deep.forward(x);
    for (int i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(ref2[static_cast<std::size_t>(i)]).epsilon(1e-14));
  }
}

TEST_CASE("forward rejects wrong input size") {
  Mlp net({3, 4, 1}, Activation::tanh);
  CHECK_THROWS_AS(net.forward(Vec::Zero(2)), DimensionError);
}

TEST_CASE("backward of a linear layer gives dW = x^T") {
  Rng rng(3);
  auto net = Mlp::glorot({3, 1}, Activation::tanh, rng);
  const Vec x{{0.2, -0.7, 1.5}};
  Tape tape;
  net.forward(x, tape);
  Vec grad = Vec::Zero(net.num_params());
  const Vec gx = net.backward(tape, Vec::Ones(1), grad);
  // Layout: W (1x3, column-major) then b.
  CHECK(grad.head(3).isApprox(x));
  CHECK(grad[3] == doctest::Approx(1.0));
  CHECK(gx.isApprox(net.weight(0).row(0).transpose()));
}

TEST_CASE("zero upstream gives zero gradients") {
  Rng rng(5);
  auto net = Mlp::glorot({3, 8, 2}, Activation::relu, rng);
  Tape tape;
  net.forward(Vec::Ones(3), tape);
  Vec grad = Vec::Zero(net.num_params());
  const Vec gx = net.backward(tape, Vec::Zero(2), grad);
  CHECK(grad.isZero(0.0));
  CHECK(gx.isZero(0.0));
}

TEST_CASE("analytic gradients match central differences for every network shape") {
  // Shapes: mean/value/critic networks of the three environments and the
  // linear fixture, plus a small deep net.
  const std::vector<std::vector<int>> shapes{{3, 8, 8, 1},  {2, 64, 64, 1}, {4, 64, 64, 1}, {12, 64, 64, 1},
                                             {2, 64, 64, 1}, {4, 64, 64, 2}, {12, 64, 64, 4}, {2, 1}};
  std::size_t checked = 0;
  std::size_t failed = 0;
  for (const auto& shape : shapes) {
    for (int trial = 0; trial < 20; ++trial) {
      Rng rng(1000 * shape.size() + static_cast<std::uint64_t>(shape.front() * 31 + shape.back() * 7 + trial));
      auto net = Mlp::glorot(shape, Activation::tanh, rng);
      net.set_params(net.params() + random_vec(net.num_params(), rng, 0.1));
      const Vec x = random_vec(shape.front(), rng, 1.5);
      const Vec up = random_vec(shape.back(), rng, 1.0);
      Tape tape;
      net.forward(x, tape);
      Vec grad = Vec::Zero(net.num_params());
      const Vec gx = net.backward(tape, up, grad);

      Mlp probe = net;
      const auto f_params = [&](const Vec& p) {
        probe.set_params(p);
        return up.dot(probe.forward(x));
      };
      const Vec fd = central_diff(f_params, net.params());
      const Vec fdx = central_diff([&](const Vec& xx) { return up.dot(net.forward(xx)); }, x);
      for (Eigen::Index i = 0; i < fd.size(); ++i, ++checked) failed += !grad_close(grad[i], fd[i]);
      for (Eigen::Index i = 0; i < fdx.size(); ++i, ++checked) failed += !grad_close(gx[i], fdx[i]);
    }
  }
  INFO("checked " << checked << " components");
  CHECK(failed == 0);
}

TEST_CASE("relu backward uses the active-unit mask") {
  Mlp net({1, 2, 1}, Activation::relu);
  net.weight(0)(0, 0) = 1.0;
  net.weight(0)(1, 0) = -1.0;
  net.weight(1)(0, 0) = 3.0;
  net.weight(1)(0, 1) = 5.0;
  Tape tape;
  net.forward(Vec::Constant(1, 2.0), tape);  // hidden: (2, 0 after relu)
  Vec grad = Vec::Zero(net.num_params());
  const Vec gx = net.backward(tape, Vec::Ones(1), grad);
  CHECK(gx[0] == doctest::Approx(3.0));
}

TEST_CASE("policy log-prob closed forms") {
  GaussianPolicy pol(Mlp({2, 1}, Activation::tanh), Vec::Zero(1));
  const Vec s{{0.3, 0.4}};
  const double base = -0.5 * std::log(2.0 * std::numbers::pi);
  CHECK(pol.log_prob(s, Vec::Zero(1)) == doctest::Approx(base));
  CHECK(pol.log_prob(s, Vec::Ones(1)) == doctest::Approx(base - 0.5));
}

TEST_CASE("2-D log-prob matches the density formula") {
  Rng rng(2);
  auto pol = GaussianPolicy::make(3, 2, {8}, Activation::tanh, 0.0, rng);
  pol.set_log_std(Vec{{std::log(1.0), std::log(2.0)}});
  const Vec s{{0.1, -0.2, 0.3}};
  const Vec mu = pol.mean(s);
  const Vec a = mu + Vec{{0.3, -0.4}};
  const double d1 = std::exp(-0.5 * 0.09) / std::sqrt(2.0 * std::numbers::pi);
  const double d2 = std::exp(-0.5 * (0.4 / 2.0) * (0.4 / 2.0)) / (2.0 * std::sqrt(2.0 * std::numbers::pi));
  CHECK(pol.log_prob(s, a) == doctest::Approx(std::log(d1 * d2)).epsilon(1e-12));
}

TEST_CASE("density integrates to one") {
  for (double sigma : {0.3, 1.0, 2.5}) {
    GaussianPolicy pol(Mlp({1, 1}, Activation::tanh), Vec::Constant(1, std::log(sigma)));
    const int n = 20001;
    const double lo = -6.0 * sigma;
    const double h = 12.0 * sigma / (n - 1);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      total += w * std::exp(pol.log_prob(Vec::Zero(1), Vec::Constant(1, lo + i * h)));
    }
    CHECK(total * h == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("log-prob gradient matches central differences") {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(500 + static_cast<std::uint64_t>(trial));
    auto pol = GaussianPolicy::make(4, 2, {16, 16}, Activation::tanh, -0.5, rng);
    const Vec s = random_vec(4, rng);
    const Vec a = pol.mean(s) + random_vec(2, rng);
    Vec grad = Vec::Zero(pol.num_params());
    pol.accumulate_log_prob_grad(s, a, 1.0, grad);
    GaussianPolicy probe = pol;
    const Vec fd = central_diff(
        [&](const Vec& p) {
          probe.set_params(p);
          return probe.log_prob(s, a);
        },
        pol.params());
    for (Eigen::Index i = 0; i < fd.size(); ++i) CHECK(grad_close(grad[i], fd[i]));
  }
}

TEST_CASE("entropy gradient matches central differences") {
  Rng rng(9);
  auto pol = GaussianPolicy::make(2, 3, {4}, Activation::tanh, -0.3, rng);
  Vec grad = Vec::Zero(pol.num_params());
  pol.accumulate_entropy_grad(1.0, grad);
  GaussianPolicy probe = pol;
  const Vec fd = central_diff(
      [&](const Vec& p) {
        probe.set_params(p);
        return probe.entropy();
      },
      pol.params());
  for (Eigen::Index i = 0; i < fd.size(); ++i) CHECK(grad_close(grad[i], fd[i]));
}

TEST_CASE("sampling with a vanishing std returns the mean") {
  Rng rng(4);
  auto pol = GaussianPolicy::make(2, 2, {8}, Activation::tanh, std::log(1e-8), rng);
  const Vec s{{0.5, -0.1}};
  CHECK((pol.sample(s, rng) - pol.mean(s)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("sampling is reproducible per seed") {
  Rng init(4);
  auto pol = GaussianPolicy::make(2, 2, {8}, Activation::tanh, 0.0, init);
  const Vec s{{0.5, -0.1}};
  Rng a(99), b(99);
  const Vec a1 = pol.sample(s, a);
  const Vec a2 = pol.sample(s, a);
  CHECK_FALSE(a1.isApprox(a2));
  CHECK(a1 == pol.sample(s, b));
}

TEST_CASE("empirical sample mean converges to the policy mean") {
  Rng init(6);
  auto pol = GaussianPolicy::make(3, 2, {8}, Activation::tanh, std::log(0.7), init);
  const Vec s{{0.2, 0.1, -0.3}};
  Rng rng(123);
  const int n = 100000;
  Vec acc = Vec::Zero(2);
  for (int i = 0; i < n; ++i) acc += pol.sample(s, rng);
  acc /= n;
  const double bound = 3.0 * 0.7 / std::sqrt(static_cast<double>(n));
  CHECK(((acc - pol.mean(s)).cwiseAbs().array() < bound).all());
}

TEST_CASE("optimizer steps") {
  SUBCASE("sgd arithmetic") {
    Optimizer opt(OptimizerKind::sgd, 0.1);
    Vec p = Vec::Ones(1);
    opt.step(p, Vec::Constant(1, 2.0));
    CHECK(p[0] == doctest::Approx(0.8));
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    for (auto kind : {OptimizerKind::sgd, OptimizerKind::adam}) {
      Optimizer opt(kind, 0.5);
      Vec p{{1.0, -2.0}};
      opt.step(p, Vec::Zero(2));
      CHECK(p == Vec{{1.0, -2.0}});
    }
  }
  SUBCASE("adam minimizes p^2") {
    Optimizer opt(OptimizerKind::adam, 0.05);
    Vec p = Vec::Ones(1);
    for (int i = 0; i < 100; ++i) opt.step(p, 2.0 * p);
    CHECK(std::abs(p[0]) < 0.05);
    CHECK(opt.step_count() == 100);
  }
  SUBCASE("non-finite gradient is rejected without side effects") {
    Optimizer opt(OptimizerKind::adam, 0.1);
    Vec p{{1.0, 2.0}};
    CHECK_THROWS_AS(opt.step(p, Vec{{1.0, std::nan("")}}), NumericalError);
    CHECK(p == Vec{{1.0, 2.0}});
    CHECK(opt.step_count() == 0);
  }
  SUBCASE("bad learning rate") { CHECK_THROWS(Optimizer(OptimizerKind::sgd, 0.0)); }
}

TEST_CASE("set_params rejects non-finite values") {
  Mlp net({2, 2}, Activation::tanh);
  Vec p = Vec::Zero(net.num_params());
  p[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS(net.set_params(p));
}

TEST_CASE("identical seeds give bitwise-identical networks") {
  Rng a(42), b(42);
  auto n1 = Mlp::glorot({4, 64, 64, 2}, Activation::tanh, a);
  auto n2 = Mlp::glorot({4, 64, 64, 2}, Activation::tanh, b);
  CHECK(n1.params() == n2.params());
  const Vec x{{0.1, 0.2, 0.3, 0.4}};
  CHECK(n1.forward(x) == n2.forward(x));
}

TEST_CASE("glorot bounds and zero biases") {
  Rng rng(1);
  auto net = Mlp::glorot({10, 30, 5}, Activation::tanh, rng);
  CHECK(net.weight(0).cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 40.0));
  CHECK(net.weight(1).cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 35.0));
  CHECK(net.bias(0).isZero(0.0));
}

TEST_CASE("serialization round trip") {
  Rng rng(8);
  auto pol = GaussianPolicy::make(3, 2, {5, 4}, Activation::relu, -0.5, rng);
  const auto back = GaussianPolicy::from_json(nlohmann::json::parse(pol.to_json().dump()));
  CHECK(back.params() == pol.params());
  CHECK(back.mean_net().activation() == Activation::relu);
  CHECK(back.log_std() == pol.log_std());
}
