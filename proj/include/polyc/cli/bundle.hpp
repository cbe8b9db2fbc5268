#pragma once

#include "polyc/cli/config.hpp"
#include "polyc/lyapunov/critic.hpp"
#include "polyc/nn/gaussian_policy.hpp"

#include <filesystem>
#include <optional>

namespace polyc::cli {

/// Lyapunov candidate stored in a bundle: a learned network or a quadratic
/// form (s - origin)^T P (s - origin).
struct Candidate {
  std::string kind = "mlp";
  std::optional<lyapunov::LyapunovCritic> mlp;
  Mat p;
  Vec origin;

  static Candidate from_critic(lyapunov::LyapunovCritic critic);
  static Candidate quadratic(Mat p, Vec origin);

  int state_dim() const;
  double value(const Vec& s) const;
  ScalarField field() const;

  nlohmann::json to_json() const;
  static Candidate from_json(const nlohmann::json& j);
};

/// Everything needed to re-run a trained controller: config snapshot,
/// networks, critic and provenance (iteration, seed).
struct Bundle {
  RunConfig config;
  nn::GaussianPolicy policy;
  nn::Mlp value_net;
  Candidate critic;
  int iter = 0;
  std::uint64_t seed = 0;
  double beta = 0.0;

  nlohmann::json to_json() const;
  /// Throws ConfigError when the networks do not fit the environment.
  static Bundle from_json(const nlohmann::json& j);

  static Bundle from_agent(const RunConfig& cfg, const policy::Agent& agent);
};

void save_bundle(const std::filesystem::path& path, const Bundle& b);
Bundle load_bundle(const std::filesystem::path& path);

/**
 * Analytic fixture: a Hurwitz-stabilizable 2-D linear system, a linear
 * policy implementing its LQR gain, and the Riccati quadratic as critic.
 */
Bundle make_linear_fixture();

}  // namespace polyc::cli
