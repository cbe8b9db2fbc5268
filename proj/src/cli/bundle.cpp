#include "polyc/cli/bundle.hpp"

#include "polyc/cli/io.hpp"
#include "polyc/cli/lqr.hpp"
#include "polyc/json_util.hpp"

namespace polyc::cli {

Candidate Candidate::from_critic(lyapunov::LyapunovCritic critic) {
  Candidate c;
  c.kind = "mlp";
  c.origin = critic.origin;
  c.mlp = std::move(critic);
  return c;
}

Candidate Candidate::quadratic(Mat p, Vec origin) {
  if (p.rows() != p.cols() || p.rows() != origin.size()) throw DimensionError("quadratic candidate: shape mismatch");
  Candidate c;
  c.kind = "quadratic";
  c.p = std::move(p);
  c.origin = std::move(origin);
  return c;
}

int Candidate::state_dim() const { return static_cast<int>(origin.size()); }

double Candidate::value(const Vec& s) const {
  if (mlp) return mlp->value(s);
  const Vec d = s - origin;
  return d.dot(p * d);
}

ScalarField Candidate::field() const {
  return [self = *this](const Vec& s) { return self.value(s); };
}

nlohmann::json Candidate::to_json() const {
  if (mlp) return mlp->to_json();
  return {{"kind", "quadratic"}, {"P", mat_to_json(p)}, {"origin", vec_to_json(origin)}};
}

Candidate Candidate::from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "mlp") return from_critic(lyapunov::LyapunovCritic::from_json(j));
  if (kind == "quadratic") {
    check_keys(j, {"kind", "P", "origin"}, "critic(quadratic)");
    return quadratic(mat_from_json(j.at("P")), vec_from_json(j.at("origin")));
  }
  throw ConfigError("unknown critic kind '" + kind + "'");
}

nlohmann::json Bundle::to_json() const {
  return {{"format", "polyc-bundle"},
          {"version", 1},
          {"config", config.to_json()},
          {"policy", policy.to_json()},
          {"value_net", value_net.to_json()},
          {"critic", critic.to_json()},
          {"iter", iter},
          {"seed", seed},
          {"beta", beta}};
}

Bundle Bundle::from_json(const nlohmann::json& j) {
  check_keys(j, {"format", "version", "config", "policy", "value_net", "critic", "iter", "seed", "beta"}, "bundle");
  if (j.value("format", "") != "polyc-bundle") throw ConfigError("not a checkpoint bundle");
  Bundle b;
  try {
    b.config = RunConfig::from_json(j.at("config"));
    b.policy = nn::GaussianPolicy::from_json(j.at("policy"));
    b.value_net = nn::Mlp::from_json(j.at("value_net"));
    b.critic = Candidate::from_json(j.at("critic"));
    b.iter = j.at("iter").get<int>();
    b.seed = j.at("seed").get<std::uint64_t>();
    b.beta = j.at("beta").get<double>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bundle: ") + e.what());
  }
  const auto env = envs::make_env(b.config.env);
  const int n = env->state_dim();
  if (b.policy.mean_net().input_dim() != n || b.policy.mean_net().output_dim() != env->action_dim() ||
      b.value_net.input_dim() != n || b.critic.state_dim() != n) {
    throw ConfigError("bundle networks do not match environment '" + env->name() + "'");
  }
  return b;
}

Bundle Bundle::from_agent(const RunConfig& cfg, const policy::Agent& agent) {
  Bundle b;
  b.config = cfg;
  b.policy = agent.policy;
  b.value_net = agent.value_net;
  b.critic = Candidate::from_critic(agent.critic);
  b.iter = agent.iter;
  b.seed = cfg.seed;
  b.beta = agent.beta;
  return b;
}

void save_bundle(const std::filesystem::path& path, const Bundle& b) { write_json(path, b.to_json()); }

Bundle load_bundle(const std::filesystem::path& path) { return Bundle::from_json(read_json(path)); }

Bundle make_linear_fixture() {
  const Mat a{{0.0, 1.0}, {-1.0, -0.5}};
  const Mat bm{{0.0}, {1.0}};
  RunConfig cfg;
  cfg.env = {{"name", "linear"},
             {"A", mat_to_json(a)},
             {"B", mat_to_json(bm)},
             {"dt", 0.01},
             {"domain", box_to_json({{-1.0, 1.0}, {-1.0, 1.0}})},
             {"action_bounds", box_to_json({{-10.0, 10.0}})},
             {"horizon", 1000},
             {"init_region", box_to_json({{-1.0, 1.0}, {-1.0, 1.0}})}};
  cfg.env = envs::make_env(cfg.env)->to_json();
  cfg.algo.hidden = {};
  cfg.critic.hidden = {};
  cfg.output_dir = "runs/linear_fixture";
  cfg.eval.episodes = 20;
  cfg.eval.threshold = 0.05;

  const auto env = envs::make_env(cfg.env);
  const auto gain = lqr(a, bm, Mat::Identity(2, 2), Mat::Identity(1, 1));

  Bundle b;
  b.config = cfg;
  // Linear policy: physical action = center + scale * (W s) = -K s.
  nn::Mlp mean({2, 1}, nn::Activation::tanh);
  mean.weight(0) = -gain.k / env->action_scale()[0];
  b.policy = nn::GaussianPolicy(mean, Vec::Constant(1, cfg.algo.init_log_std));
  b.value_net = nn::Mlp({2, 1}, nn::Activation::tanh);
  b.critic = Candidate::quadratic(gain.p, Vec::Zero(2));
  return b;
}

}  // namespace polyc::cli
