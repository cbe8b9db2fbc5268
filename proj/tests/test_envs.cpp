#include "doctest.h"

#include "polyc/envs/linear.hpp"
#include "polyc/envs/path_tracking.hpp"
#include "polyc/envs/pendulum.hpp"
#include "polyc/envs/quadrotor.hpp"

#include <cmath>
#include <numbers>

using namespace polyc;
using namespace polyc::envs;

namespace {

constexpr double kPi = std::numbers::pi;

Vec step_of(const Env& env, const Vec& s, const Vec& a) {
  EpisodeClock clock;
  return env.step(s, a, clock).next;
}

/// All four built-in environments with their defaults.
std::vector<std::unique_ptr<Env>> all_envs() {
  std::vector<std::unique_ptr<Env>> out;
  out.push_back(std::make_unique<Pendulum>());
  out.push_back(std::make_unique<PathTracking>());
  out.push_back(std::make_unique<Quadrotor>());
  out.push_back(std::make_unique<LinearSystem>(LinearSystem::scalar_rate(2, -1.0, 0.01)));
  return out;
}

/// Samples away from clamps and seams: a shrunken copy of the init region.
Vec interior_sample(const Env& env, Rng& rng, double shrink = 0.5) {
  Box b = env.init_region();
  for (auto& iv : b) {
    const double c = iv.center(), h = 0.5 * iv.width() * shrink;
    iv = {c - h, c + h};
  }
  return box_sample(b, rng);
}

}  // namespace

TEST_CASE("pendulum step examples") {
  Pendulum env;
  CHECK(step_of(env, Vec::Zero(2), Vec::Zero(1)).isZero(0.0));
  const Vec next = step_of(env, Vec{{kPi / 2, 0.0}}, Vec::Zero(1));
  CHECK(next[1] == doctest::Approx(0.75));
  CHECK(next[0] == doctest::Approx(kPi / 2 + 0.05 * 0.75));
}

TEST_CASE("pendulum clamps torque and speed, wraps angle") {
  Pendulum env;
  const Vec a = step_of(env, Vec{{0.0, 0.0}}, Vec::Constant(1, 50.0));
  const Vec b = step_of(env, Vec{{0.0, 0.0}}, Vec::Constant(1, 2.0));
  CHECK(a == b);
  CHECK(step_of(env, Vec{{0.0, 7.99}}, Vec::Constant(1, 2.0))[1] == doctest::Approx(8.0));
  const Vec w = step_of(env, Vec{{3.1, 7.0}}, Vec::Zero(1));
  CHECK(w[0] <= kPi);
  CHECK(w[0] > -kPi);
  CHECK(Pendulum::wrapped(3.1, w[0]));
  CHECK_FALSE(Pendulum::wrapped(0.1, -0.1));
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
}

TEST_CASE("pendulum free fall agrees with an RK4 reference over the first half second") {
  // Semi-implicit Euler is first order, so the trajectories separate once the
  // pendulum swings through; the short window and first-order convergence are
  // the checkable claims.
  auto reference = [](double th, double w, double t_end) {
    const int n = 20000;
    const double h = t_end / n;
    auto f = [](double a, double b) { return std::array<double, 2>{b, 15.0 * std::sin(a)}; };
    for (int i = 0; i < n; ++i) {
      const auto k1 = f(th, w);
      const auto k2 = f(th + 0.5 * h * k1[0], w + 0.5 * h * k1[1]);
      const auto k3 = f(th + 0.5 * h * k2[0], w + 0.5 * h * k2[1]);
      const auto k4 = f(th + h * k3[0], w + h * k3[1]);
      th += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
      w += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    }
    return std::array<double, 2>{th, w};
  };
  auto euler_error = [&](double dt, double t_end) {
    Pendulum::Params p;
    p.dt = dt;
    Pendulum env(p);
    Vec s{{0.1, 0.0}};
    double worst = 0.0;
    const int steps = static_cast<int>(std::lround(t_end / dt));
    for (int k = 1; k <= steps; ++k) {
      s = step_of(env, s, Vec::Zero(1));
      const auto r = reference(0.1, 0.0, k * dt);
      worst = std::max({worst, std::abs(s[0] - r[0]), std::abs(s[1] - r[1])});
    }
    return worst;
  };
  const double e1 = euler_error(0.05, 0.5);
  CHECK(e1 < 5e-2);
  const double e2 = euler_error(0.025, 0.5);
  CHECK(e1 / e2 > 1.6);
}

TEST_CASE("pendulum energy error stays bounded over 200 steps") {
  Pendulum env;
  Vec s{{0.1, 0.0}};
  auto energy = [](const Vec& x) { return 0.5 * x[1] * x[1] + 15.0 * std::cos(x[0]); };
  const double e0 = energy(s);
  double first = 0.0, second = 0.0;
  for (int k = 0; k < 200; ++k) {
    s = step_of(env, s, Vec::Zero(1));
    (k < 100 ? first : second) = std::max(k < 100 ? first : second, std::abs(energy(s) - e0));
  }
  CHECK(first < 3.0);
  CHECK(second < 1.1 * first);  // symplectic: no secular drift
}

TEST_CASE("pendulum reward") {
  Pendulum env;
  EpisodeClock c;
  CHECK(env.reward(Vec::Zero(2), Vec::Zero(1), c) == 0.0);
  CHECK(env.reward(Vec{{kPi, 0.0}}, Vec::Zero(1), c) == doctest::Approx(-kPi * kPi));
  CHECK(env.reward(Vec{{0.5, 1.0}}, Vec::Constant(1, 2.0), c) == doctest::Approx(-0.354));
  CHECK(env.reward(Vec{{0.5 + 2 * kPi, 0.0}}, Vec::Zero(1), c) == doctest::Approx(-0.25));
}

TEST_CASE("path tracking step examples") {
  PathTracking env(PathTracking::Params{}, Path::straight());
  const Vec s{{0.0, 0.0, 3.0, 3.0}};
  CHECK(step_of(env, s, Vec::Zero(2)) == s);
  const Vec n = step_of(env, Vec{{0.0, 0.1, 1.0, 1.0}}, Vec::Zero(2));
  CHECK(n[0] == doctest::Approx(0.02 * std::sin(0.1)).epsilon(1e-12));
  CHECK(n[0] == doctest::Approx(0.001997).epsilon(1e-3));
}

TEST_CASE("steady-state steering keeps the car on a circle") {
  const double kappa = 0.1;
  PathTracking env(PathTracking::Params{}, Path::circle(kappa));
  const double delta = std::atan(env.params().wheelbase * kappa);
  Vec s{{0.0, 0.0, 5.0, 5.0}};
  EpisodeClock clock;
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    s = env.step(s, Vec{{0.0, delta}}, clock).next;
    worst = std::max(worst, std::abs(s[0]));
  }
  CHECK(worst < 1e-2);
}

TEST_CASE("path tracking singularity guard terminates") {
  PathTracking env(PathTracking::Params{}, Path::circle(1.0));
  EpisodeClock clock;
  CHECK(env.step(Vec{{0.9995, 0.0, 5.0, 5.0}}, Vec::Zero(2), clock).done);
}

TEST_CASE("path curvature follows the segments") {
  const auto p = Path::training();
  CHECK(p.curvature_at(0.0) == 0.0);
  CHECK(p.curvature_at(20.0) == doctest::Approx(0.05));
  CHECK(p.curvature_at(1e6) == doctest::Approx(0.05));
  const auto u = Path::unseen();
  CHECK(u.curvature_at(15.0) == doctest::Approx(0.08));
  CHECK(u.curvature_at(35.0) == doctest::Approx(-0.08));
}

TEST_CASE("path tracking reward") {
  PathTracking env;
  EpisodeClock c;
  CHECK(env.reward(Vec{{0.0, 0.0, 5.0, 5.0}}, Vec::Zero(2), c) == 0.0);
  CHECK(env.reward(Vec{{1.0, 0.0, 5.0, 5.0}}, Vec::Zero(2), c) == doctest::Approx(-1.0));
  CHECK(env.reward(Vec{{1.0, 1.0, 6.0, 5.0}}, Vec::Zero(2), c) == doctest::Approx(-1.6));
}

TEST_CASE("quadrotor hover is a fixed point") {
  Quadrotor env;
  const Vec next = step_of(env, Vec::Zero(12), env.equilibrium_action());
  CHECK(next.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("quadrotor vertical acceleration at 1.1x hover speed") {
  Quadrotor env;
  const double g = env.params().g;
  Vec s = Vec::Zero(12);
  s[3] = -env.params().ref_speed;  // at rest in the world frame
  const Vec omega = Vec::Constant(4, 1.1 * env.hover_speed());
  CHECK(env.derivative(s, omega)[5] == doctest::Approx(g * (1.1 * 1.1 - 1.0)).epsilon(1e-12));
  CHECK(g * (1.1 * 1.1 - 1.0) == doctest::Approx(2.06).epsilon(1e-2));
  // Constant acceleration along z with level attitude: exact for RK4.
  const double acc = g * 0.21;
  const double dt = env.dt();
  const Vec next = step_of(env, s, omega);
  CHECK(next[5] == doctest::Approx(acc * dt).epsilon(1e-6));
  CHECK(std::abs(next[2] - 0.5 * acc * dt * dt) < 1e-6);
  CHECK(std::abs(next[0] - (-env.params().ref_speed * dt)) < 1e-12);
}

TEST_CASE("quadrotor body torques follow the moment-arm formula") {
  Quadrotor env;
  const auto& p = env.params();
  const double h = env.hover_speed();
  for (int rotor = 0; rotor < 4; ++rotor) {
    Vec omega = Vec::Constant(4, h);
    omega[rotor] *= 1.1;
    const auto tau = env.body_torques(omega);
    const double d = p.k_f * h * h * (1.21 - 1.0);
    const double roll = rotor == 3 ? p.arm * d : rotor == 1 ? -p.arm * d : 0.0;
    const double pitch = rotor == 2 ? p.arm * d : rotor == 0 ? -p.arm * d : 0.0;
    const double yaw = (rotor % 2 == 0 ? -1.0 : 1.0) * p.k_m * h * h * 0.21;
    CHECK(tau[0] == doctest::Approx(roll).scale(1e-9));
    CHECK(tau[1] == doctest::Approx(pitch).scale(1e-9));
    CHECK(tau[2] == doctest::Approx(yaw).scale(1e-12));
    CHECK(std::abs(tau[0]) + std::abs(tau[1]) > 0.0);
  }
}

TEST_CASE("quadrotor reward") {
  Quadrotor env;
  EpisodeClock c;
  const Vec h = env.equilibrium_action();
  CHECK(env.reward(Vec::Zero(12), h, c) == 0.0);
  Vec s = Vec::Zero(12);
  s[1] = 1.0;
  CHECK(env.reward(s, h, c) == doctest::Approx(-1.0));
  s.setZero();
  s[6] = 0.2;
  CHECK(env.reward(s, h, c) == doctest::Approx(-0.01));
}

TEST_CASE("quadrotor gimbal guard") {
  Quadrotor env;
  Vec s = Vec::Zero(12);
  s[7] = kPi / 2 - 0.051;
  s[10] = 5.0;
  EpisodeClock clock;
  CHECK(env.step(s, env.equilibrium_action(), clock).done);
}

TEST_CASE("declared equilibria are fixed points") {
  for (const auto& env : all_envs()) {
    const Vec eq = env->equilibrium();
    CHECK(box_contains(env->domain(), eq));
    const Vec next = step_of(*env, eq, env->equilibrium_action());
    INFO(env->name());
    CHECK((next - eq).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("stepping is deterministic") {
  for (const auto& env : all_envs()) {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
      const Vec s = interior_sample(*env, rng);
      const Vec a = box_sample(env->action_bounds(), rng);
      CHECK(step_of(*env, s, a) == step_of(*env, s, a));
    }
  }
}

TEST_CASE("halving dt reduces the one-step discrepancy at least threefold") {
  // Discrepancy between one step of dt and two steps of dt/2, at dt and dt/2.
  auto discrepancy = [](auto make, double dt, const Vec& s, const Vec& a) {
    const auto full = make(dt);
    const auto half = make(dt / 2);
    return (step_of(full, s, a) - step_of(half, step_of(half, s, a), a)).norm();
  };
  auto ratio_check = [&](auto make, double dt, const Env& proto, double shrink) {
    Rng rng(17);
    int worse = 0;
    for (int i = 0; i < 100; ++i) {
      const Vec s = interior_sample(proto, rng, shrink);
      Box ab = proto.action_bounds();
      const Vec a = box_clamp(ab, proto.equilibrium_action() + 0.3 * (box_sample(ab, rng) - box_center(ab)));
      const double e1 = discrepancy(make, dt, s, a);
      const double e2 = discrepancy(make, dt / 2, s, a);
      if (!(e1 >= 3.0 * e2)) ++worse;
    }
    return worse;
  };
  SUBCASE("pendulum") {
    auto make = [](double dt) {
      Pendulum::Params p;
      p.dt = dt;
      return Pendulum(p);
    };
    CHECK(ratio_check(make, 0.05, Pendulum(), 0.3) == 0);
  }
  SUBCASE("path tracking") {
    auto make = [](double dt) {
      PathTracking::Params p;
      p.dt = dt;
      return PathTracking(p, Path::circle(0.05));
    };
    CHECK(ratio_check(make, 0.02, PathTracking(), 0.5) == 0);
  }
  SUBCASE("quadrotor") {
    auto make = [](double dt) {
      Quadrotor::Params p;
      p.dt = dt;
      return Quadrotor(p);
    };
    CHECK(ratio_check(make, 0.04, Quadrotor(), 0.5) == 0);
  }
}

TEST_CASE("step maps are locally Lipschitz") {
  for (const auto& env : all_envs()) {
    Rng rng(23);
    std::normal_distribution<double> normal(0.0, 1.0);
    double k = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Vec s1 = interior_sample(*env, rng);
      Vec d(s1.size());
      for (Eigen::Index j = 0; j < d.size(); ++j) d[j] = normal(rng);
      const Vec s2 = s1 + d * (1e-3 * std::uniform_real_distribution<double>(0.1, 1.0)(rng) / d.norm());
      const Vec a = box_center(env->action_bounds());
      const Vec u = env->name() == "quadrotor" ? env->equilibrium_action() : a;
      k = std::max(k, (step_of(*env, s1, u) - step_of(*env, s2, u)).norm() / (s1 - s2).norm());
    }
    MESSAGE(env->name() << " empirical step Lipschitz constant " << k);
    CHECK(std::isfinite(k));
    CHECK(k < 10.0);
  }
}

TEST_CASE("reset samples stay in the box and cover every orthant") {
  for (const auto& env : all_envs()) {
    Rng rng(5);
    EpisodeClock clock;
    const Box& box = env->init_region();
    std::vector<int> dims;
    for (std::size_t d = 0; d < box.size() && dims.size() < 3; ++d) {
      if (box[d].width() > 0.0) dims.push_back(static_cast<int>(d));
    }
    std::vector<int> hits(std::size_t{1} << dims.size(), 0);
    for (int i = 0; i < 10000; ++i) {
      const Vec s = env->reset(rng, clock);
      REQUIRE(box_contains(box, s));
      std::size_t code = 0;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        const auto d = static_cast<std::size_t>(dims[k]);
        if (s[dims[k]] > box[d].center()) code |= std::size_t{1} << k;
      }
      ++hits[code];
    }
    INFO(env->name());
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h > 0; }));
  }
}

TEST_CASE("reset with a degenerate box is deterministic and seeds reproduce") {
  Pendulum env;
  env.set_init_region({{0.3, 0.3}, {-0.2, -0.2}});
  Rng rng(1);
  EpisodeClock clock;
  CHECK(env.reset(rng, clock) == Vec{{0.3, -0.2}});
  Pendulum env2;
  Rng a(77), b(77);
  CHECK(env2.reset(a, clock) == env2.reset(b, clock));
}

TEST_CASE("default init regions") {
  Pendulum p;
  CHECK(p.init_region()[0].lo == doctest::Approx(-kPi));
  CHECK(p.init_region()[1].hi == doctest::Approx(1.0));
  PathTracking t;
  CHECK(t.init_region()[0].hi == doctest::Approx(1.0));
  CHECK(t.init_region()[1].hi == doctest::Approx(0.5));
  Quadrotor q;
  CHECK(q.init_region()[0].hi == doctest::Approx(0.5));
  CHECK(q.init_region()[6].hi == doctest::Approx(0.1));
}

TEST_CASE("linear system uses the exact flow") {
  const auto env = LinearSystem::scalar_rate(2, -1.0, 0.01);
  const Vec next = step_of(env, Vec{{1.0, -0.5}}, Vec::Zero(1));
  CHECK(next[0] == doctest::Approx(std::exp(-0.01)).epsilon(1e-14));
  CHECK(next[1] == doctest::Approx(-0.5 * std::exp(-0.01)).epsilon(1e-14));
}

TEST_CASE("environment configuration round trips and rejects unknown keys") {
  for (const auto& env : all_envs()) {
    const auto j = env->to_json();
    const auto back = make_env(j);
    CHECK(back->to_json() == j);
    auto bad = j;
    bad["typo_key"] = 1;
    CHECK_THROWS(make_env(bad));
  }
}
