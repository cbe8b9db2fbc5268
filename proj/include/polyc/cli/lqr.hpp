#pragma once

#include "polyc/envs/env.hpp"

namespace polyc::cli {

/// Continuous-time linear model x_dot = A x + B u around an operating point.
struct LinearModel {
  Mat a;
  Mat b;
};

/**
 * Central-difference linearization of one env step at (x0, u0), converted to
 * continuous time: A = (dPhi/dx - I) / dt, B = (dPhi/du) / dt.
 */
LinearModel linearize(const envs::Env& env, const Vec& x0, const Vec& u0, double h = 1e-6);

/// Solves A^T P + P A + Q = 0 (A Hurwitz) through the Kronecker form.
Mat solve_lyapunov(const Mat& a, const Mat& q);

bool is_hurwitz(const Mat& a);

struct LqrResult {
  Mat p;  // Riccati solution
  Mat k;  // gain, u = -K x
  int iterations = 0;
};

/**
 * Continuous algebraic Riccati equation by Kleinman (Newton) iteration. When
 * A is not Hurwitz the initial stabilizing gain is obtained by continuation
 * on a spectral shift A - sigma I, sigma decreasing to zero.
 */
LqrResult lqr(const Mat& a, const Mat& b, const Mat& q, const Mat& r, int max_iter = 200, double tol = 1e-12);

}  // namespace polyc::cli
