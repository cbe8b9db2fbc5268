#pragma once

#include "polyc/cli/bundle.hpp"
#include "polyc/validator/landscape.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace polyc::cli {

/// Exit codes shared by every command.
enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsageError = 2 };

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> output_dir;
  bool quiet = false;
};

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::optional<std::size_t> episodes;
  std::optional<Box> init_region;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  nlohmann::json env_overrides = nlohmann::json::object();
};

struct CertifyOptions {
  std::filesystem::path checkpoint;
  std::optional<double> a_const;
  std::optional<double> epsilon_volume;
  std::optional<validator::CertifyMode> mode;
  std::optional<std::vector<int>> plane;
  std::optional<std::size_t> max_cells;
  std::optional<std::filesystem::path> output_dir;
};

struct CompareOptions {
  std::vector<std::filesystem::path> checkpoints;
  std::vector<int> plane{0, 1};
  std::optional<double> a_const;
  std::optional<std::size_t> max_cells;
  bool include_lqr = true;
  std::optional<std::filesystem::path> output_dir;
};

/// Outcome of the evaluation rollouts.
struct EvalSummary {
  std::size_t episodes = 0;
  double stabilized_fraction = 0.0;
  std::size_t wrap_episodes = 0;
  double tracking_rms = 0.0;
  double mean_return = 0.0;
  nlohmann::json details;  // full summary as written to disk
};

/// Certification of one candidate: the report on the certification grid,
/// a plane landscape and, in monte-carlo mode, the sampled estimate.
struct Analysis {
  validator::CertificationReport report;
  validator::Landscape landscape;
  std::optional<validator::MonteCarloResult> monte_carlo;

  nlohmann::json report_json() const;
};

/// Runs certification for `candidate` under the mean action of `policy`.
/// Throws ConfigError for dimension/mode conflicts.
Analysis analyze(const envs::Env& env, const nn::GaussianPolicy& policy, const Candidate& candidate,
                 const ValidatorConfig& vc, std::uint64_t seed, const std::string& title);

/// LQR quadratic candidate from a finite-difference linearization at the
/// equilibrium (Q = I, R = I).
Candidate lqr_candidate(const envs::Env& env);

EvalSummary evaluate(const Bundle& bundle, const EvalOptions& opts, const std::filesystem::path& out_dir);

int cmd_train(const TrainOptions& opts);
int cmd_eval(const EvalOptions& opts);
int cmd_certify(const CertifyOptions& opts);
int cmd_compare(const CompareOptions& opts);
int cmd_make_fixture(const std::filesystem::path& out);

}  // namespace polyc::cli
