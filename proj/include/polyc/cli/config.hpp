#pragma once

#include "polyc/policy/polyc.hpp"
#include "polyc/validator/validator.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace polyc::cli {

struct ValidatorConfig {
  double a_const = 0.01;
  std::optional<double> epsilon_volume;  // default: ten cells
  std::size_t max_cells = 250000;
  std::optional<validator::CertifyMode> mode;  // default: grid up to 4-D, slice above
  std::vector<int> plane{0, 1};
  std::optional<Vec> anchor;  // default: equilibrium
  std::optional<Box> box;     // default: env domain
  std::optional<double> margin;  // Lie-derivative slack; default: finest grid in budget
  std::size_t lipschitz_samples = 1000;
  std::size_t mc_samples = 20000;
  int band_levels = 20;

  void validate() const;
  nlohmann::json to_json() const;
  static ValidatorConfig from_json(const nlohmann::json& j);
};

struct EvalConfig {
  std::size_t episodes = 100;
  std::optional<Box> init_region;  // default: env init region
  double threshold = 0.2;
  nlohmann::json env_overrides = nlohmann::json::object();

  nlohmann::json to_json() const;
  static EvalConfig from_json(const nlohmann::json& j);
};

struct RunConfig {
  nlohmann::json env;
  policy::PolycConfig algo;
  policy::CriticConfig critic;
  ValidatorConfig validator;
  EvalConfig eval;
  std::uint64_t seed = 0;
  std::string output_dir = "runs/default";
  int checkpoint_interval = 50;

  nlohmann::json to_json() const;
  /// Validates every block; unknown keys anywhere are errors.
  static RunConfig from_json(const nlohmann::json& j);
};

RunConfig load_run_config(const std::filesystem::path& path);

/// Parses "lo:hi,lo:hi,..." into a box.
Box parse_box(const std::string& spec);

}  // namespace polyc::cli
