#include "support.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace testsupport {

Vec central_diff(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = xp[i];
    xp[i] = orig + h;
    const double fp = f(xp);
    xp[i] = orig - h;
    const double fm = f(xp);
    xp[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

bool grad_close(double analytic, double fd, double rel, double abs_floor) {
  return std::abs(analytic - fd) <= rel * std::max(std::abs(analytic), std::abs(fd)) + abs_floor;
}

polyc::validator::ClosedLoop linear_flow(const Mat& a, double dt) {
  const Mat phi = (a * dt).exp();
  return {[phi](const Vec& x) -> Vec { return phi * x; }, dt};
}

double BumpSystem::psi(const Vec& x) const {
  const double d = (x - center).norm();
  if (d <= r_in) return 1.0;
  if (d >= r_out) return 0.0;
  return (r_out - d) / (r_out - r_in);
}

Vec BumpSystem::velocity(const Vec& x) const { return -x + gain * psi(x) * x; }

Vec BumpSystem::step(const Vec& x) const {
  constexpr int kSub = 20;
  const double h = dt / kSub;
  Vec y = x;
  for (int i = 0; i < kSub; ++i) {
    const Vec k1 = velocity(y);
    const Vec k2 = velocity(y + 0.5 * h * k1);
    const Vec k3 = velocity(y + 0.5 * h * k2);
    const Vec k4 = velocity(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

polyc::validator::ClosedLoop BumpSystem::loop() const {
  const BumpSystem self = *this;
  return {[self](const Vec& x) { return self.step(x); }, dt};
}

double norm_sq(const Vec& x) { return x.squaredNorm(); }

}  // namespace testsupport
