#pragma once

#include "polyc/validator/validator.hpp"

#include <functional>

namespace testsupport {

using polyc::Mat;
using polyc::Vec;

/// Central finite-difference gradient of f at x.
Vec central_diff(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5);

/// |a - b| <= rel * max(|a|, |b|) + abs_floor.
bool grad_close(double analytic, double fd, double rel = 1e-4, double abs_floor = 1e-6);

/// Exact flow of x_dot = A x over dt, as a closed loop.
polyc::validator::ClosedLoop linear_flow(const Mat& a, double dt);

/**
 * x_dot = -x + gain * psi(x) * x, with psi = 1 inside the ball |x - c| <= r_in,
 * falling linearly to 0 at r_out. Inside the plateau and gain = 1 the flow is
 * frozen, so V = |x|^2 has lie = 0 there. Stepped with fine RK4.
 */
struct BumpSystem {
  Vec center;
  double r_in = 0.1;
  double r_out = 0.12;
  double gain = 1.0;
  double dt = 0.01;

  double psi(const Vec& x) const;
  Vec velocity(const Vec& x) const;
  Vec step(const Vec& x) const;
  polyc::validator::ClosedLoop loop() const;
};

double norm_sq(const Vec& x);

}  // namespace testsupport
