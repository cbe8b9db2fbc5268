#include "polyc/cli/lqr.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <stdexcept>

namespace polyc::cli {

LinearModel linearize(const envs::Env& env, const Vec& x0, const Vec& u0, double h) {
  require_dim(x0.size(), env.state_dim(), "linearize state");
  require_dim(u0.size(), env.action_dim(), "linearize action");
  const auto n = x0.size();
  const auto m = u0.size();
  auto phi = [&](const Vec& x, const Vec& u) {
    envs::EpisodeClock clock;
    return env.step(x, u, clock).next;
  };
  LinearModel lin{Mat(n, n), Mat(n, m)};
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec xp = x0, xm = x0;
    xp[j] += h;
    xm[j] -= h;
    lin.a.col(j) = (phi(xp, u0) - phi(xm, u0)) / (2.0 * h);
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    Vec up = u0, um = u0;
    up[j] += h;
    um[j] -= h;
    lin.b.col(j) = (phi(x0, up) - phi(x0, um)) / (2.0 * h);
  }
  lin.a = (lin.a - Mat::Identity(n, n)) / env.dt();
  lin.b /= env.dt();
  return lin;
}

Mat solve_lyapunov(const Mat& a, const Mat& q) {
  const auto n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) throw DimensionError("solve_lyapunov: shape mismatch");
  const Mat eye = Mat::Identity(n, n);
  // vec(A^T P + P A) = (I kron A^T + A^T kron I) vec(P)
  Mat kron(n * n, n * n);
  kron.setZero();
  const Mat at = a.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) += eye(i, j) * at;
      kron.block(i * n, j * n, n, n) += at(i, j) * eye;
    }
  }
  const Vec rhs = -Eigen::Map<const Vec>(q.data(), n * n);
  const Vec sol = kron.partialPivLu().solve(rhs);
  Mat p = Eigen::Map<const Mat>(sol.data(), n, n);
  p = 0.5 * (p + p.transpose()).eval();
  if (!p.allFinite()) throw NumericalError("solve_lyapunov: singular system");
  return p;
}

bool is_hurwitz(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  return (es.eigenvalues().real().array() < 0.0).all();
}

namespace {

double spectral_abscissa(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

/// Newton iteration from a gain stabilizing A - B K.
LqrResult kleinman(const Mat& a, const Mat& b, const Mat& q, const Mat& r, Mat k, int max_iter, double tol) {
  const Eigen::LDLT<Mat> r_ldlt(r);
  LqrResult res;
  Mat p_prev;
  for (int it = 1; it <= max_iter; ++it) {
    const Mat acl = a - b * k;
    if (!is_hurwitz(acl)) throw NumericalError("lqr: gain lost stability during iteration");
    res.p = solve_lyapunov(acl, q + k.transpose() * r * k);
    k = r_ldlt.solve(b.transpose() * res.p);
    res.iterations = it;
    if (it > 1 && (res.p - p_prev).norm() <= tol * std::max(1.0, res.p.norm())) break;
    p_prev = res.p;
  }
  res.k = k;
  return res;
}

}  // namespace

LqrResult lqr(const Mat& a, const Mat& b, const Mat& q, const Mat& r, int max_iter, double tol) {
  const auto n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || r.rows() != b.cols()) {
    throw DimensionError("lqr: shape mismatch");
  }
  const Mat eye = Mat::Identity(n, n);
  Mat k = Mat::Zero(b.cols(), n);
  if (!is_hurwitz(a)) {
    // Continuation: the LQR gain of A - sigma I also stabilizes A - sigma' I
    // for sigma' slightly below sigma; shrink sigma until it reaches zero.
    double sigma = spectral_abscissa(a) + 1.0;
    k = kleinman(a - sigma * eye, b, q, r, k, max_iter, tol).k;
    while (sigma > 0.0) {
      double next = sigma * 0.5 < 1e-3 ? 0.0 : sigma * 0.5;
      while (!is_hurwitz(a - next * eye - b * k)) {
        next = 0.5 * (next + sigma);
        if (sigma - next < 1e-9) throw NumericalError("lqr: continuation stalled; (A, B) may not be stabilizable");
      }
      k = kleinman(a - next * eye, b, q, r, k, max_iter, tol).k;
      sigma = next;
    }
  }
  return kleinman(a, b, q, r, k, max_iter, tol);
}

}  // namespace polyc::cli
