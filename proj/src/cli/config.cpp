#include "polyc/cli/config.hpp"

#include "polyc/cli/io.hpp"
#include "polyc/envs/env.hpp"
#include "polyc/json_util.hpp"

#include <sstream>

namespace polyc::cli {

void ValidatorConfig::validate() const {
  if (!(a_const > 0.0)) throw ConfigError("validator.a_const must be positive");
  if (epsilon_volume && !(*epsilon_volume > 0.0)) throw ConfigError("validator.epsilon_volume must be positive");
  if (max_cells == 0) throw ConfigError("validator.max_cells must be positive");
  if (plane.size() != 2 || plane[0] == plane[1] || plane[0] < 0 || plane[1] < 0) {
    throw ConfigError("validator.plane must name two distinct state dimensions");
  }
  if (margin && !(*margin > 0.0)) throw ConfigError("validator.margin must be positive");
  if (lipschitz_samples < 100) throw ConfigError("validator.lipschitz_samples must be at least 100");
  if (mc_samples < 1000) throw ConfigError("validator.mc_samples must be at least 1000");
  if (band_levels < 2) throw ConfigError("validator.band_levels must be at least 2");
}

nlohmann::json ValidatorConfig::to_json() const {
  nlohmann::json j{{"a_const", a_const},
                   {"max_cells", max_cells},
                   {"plane", plane},
                   {"lipschitz_samples", lipschitz_samples},
                   {"mc_samples", mc_samples},
                   {"band_levels", band_levels}};
  if (epsilon_volume) j["epsilon_volume"] = *epsilon_volume;
  if (mode) j["mode"] = validator::to_string(*mode);
  if (anchor) j["anchor"] = vec_to_json(*anchor);
  if (box) j["box"] = box_to_json(*box);
  if (margin) j["margin"] = *margin;
  return j;
}

ValidatorConfig ValidatorConfig::from_json(const nlohmann::json& j) {
  check_keys(j, {"a_const", "epsilon_volume", "max_cells", "mode", "plane", "anchor", "box", "margin",
                 "lipschitz_samples", "mc_samples", "band_levels"},
             "validator");
  ValidatorConfig c;
  c.a_const = get_or(j, "a_const", c.a_const);
  if (j.contains("epsilon_volume")) c.epsilon_volume = j.at("epsilon_volume").get<double>();
  c.max_cells = get_or(j, "max_cells", c.max_cells);
  if (j.contains("mode")) c.mode = validator::certify_mode_from_string(j.at("mode").get<std::string>());
  c.plane = get_or(j, "plane", c.plane);
  if (j.contains("anchor")) c.anchor = vec_from_json(j.at("anchor"));
  if (j.contains("box")) c.box = box_from_json(j.at("box"));
  if (j.contains("margin")) c.margin = j.at("margin").get<double>();
  c.lipschitz_samples = get_or(j, "lipschitz_samples", c.lipschitz_samples);
  c.mc_samples = get_or(j, "mc_samples", c.mc_samples);
  c.band_levels = get_or(j, "band_levels", c.band_levels);
  c.validate();
  return c;
}

nlohmann::json EvalConfig::to_json() const {
  nlohmann::json j{{"episodes", episodes}, {"threshold", threshold}, {"env_overrides", env_overrides}};
  if (init_region) j["init_region"] = box_to_json(*init_region);
  return j;
}

EvalConfig EvalConfig::from_json(const nlohmann::json& j) {
  check_keys(j, {"episodes", "init_region", "threshold", "env_overrides"}, "eval");
  EvalConfig c;
  c.episodes = get_or(j, "episodes", c.episodes);
  if (j.contains("init_region")) c.init_region = box_from_json(j.at("init_region"));
  c.threshold = get_or(j, "threshold", c.threshold);
  if (j.contains("env_overrides")) c.env_overrides = j.at("env_overrides");
  if (c.episodes == 0) throw ConfigError("eval.episodes must be positive");
  if (!(c.threshold > 0.0)) throw ConfigError("eval.threshold must be positive");
  if (!c.env_overrides.is_object()) throw ConfigError("eval.env_overrides must be an object");
  return c;
}

nlohmann::json RunConfig::to_json() const {
  return {{"env", env},
          {"algo", algo.to_json()},
          {"critic", critic.to_json()},
          {"validator", validator.to_json()},
          {"eval", eval.to_json()},
          {"seed", seed},
          {"output_dir", output_dir},
          {"checkpoint_interval", checkpoint_interval}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  check_keys(j, {"env", "algo", "critic", "validator", "eval", "seed", "output_dir", "checkpoint_interval"}, "config");
  if (!j.contains("env")) throw ConfigError("config: missing 'env' block");
  RunConfig c;
  try {
    c.env = j.at("env");
    // Build once so that unknown env keys and bad parameters fail at load.
    auto env = envs::make_env(c.env);
    c.env = env->to_json();
    c.algo = policy::PolycConfig::from_json(j.value("algo", nlohmann::json::object()));
    c.critic = policy::CriticConfig::from_json(j.value("critic", nlohmann::json::object()));
    c.validator = ValidatorConfig::from_json(j.value("validator", nlohmann::json::object()));
    c.eval = EvalConfig::from_json(j.value("eval", nlohmann::json::object()));
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
    c.checkpoint_interval = get_or(j, "checkpoint_interval", c.checkpoint_interval);
    for (int d : c.validator.plane) {
      if (d >= env->state_dim()) throw ConfigError("validator.plane names a dimension beyond the state");
    }
    if (c.eval.init_region && static_cast<int>(c.eval.init_region->size()) != env->state_dim()) {
      throw ConfigError("eval.init_region dimension does not match the environment");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be nonnegative");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) { return RunConfig::from_json(read_json(path)); }

Box parse_box(const std::string& spec) {
  Box box;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("box spec '" + spec + "': expected lo:hi pairs");
    try {
      box.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ConfigError("box spec '" + spec + "': bad number");
    }
    if (!(box.back().lo <= box.back().hi)) throw ConfigError("box spec '" + spec + "': lo > hi");
  }
  if (box.empty()) throw ConfigError("empty box spec");
  return box;
}

}  // namespace polyc::cli
