#include "polyc/cli/commands.hpp"
#include "polyc/json_util.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

namespace {

std::vector<int> parse_plane(const std::string& spec) {
  std::vector<int> dims;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      dims.push_back(std::stoi(item, &used));
      if (used != item.size() || dims.back() < 0) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw polyc::ConfigError("plane '" + spec + "': expected two comma-separated dimension indices");
    }
  }
  if (dims.size() != 2 || dims[0] == dims[1]) {
    throw polyc::ConfigError("plane '" + spec + "': expected two distinct dimension indices");
  }
  return dims;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace polyc::cli;
  CLI::App app{"Policy optimization with a learned Lyapunov critic, and sample-based certification"};
  app.require_subcommand(1);

  TrainOptions train;
  std::string train_out;
  auto* tr = app.add_subcommand("train", "train a policy and Lyapunov critic from a run config");
  tr->add_option("-c,--config", train.config, "run config (JSON)")->required();
  tr->add_option("-o,--output-dir", train_out, "override the config's output_dir");
  tr->add_flag("-q,--quiet", train.quiet, "no per-iteration lines");

  EvalOptions eval;
  std::size_t eval_n = 0;
  std::string eval_init, eval_out, eval_env;
  double eval_thr = 0.0;
  std::uint64_t eval_seed = 0;
  auto* ev = app.add_subcommand("eval", "deterministic evaluation rollouts of a checkpoint");
  ev->add_option("-k,--checkpoint", eval.checkpoint, "checkpoint bundle")->required();
  auto* ev_n = ev->add_option("-n,--episodes", eval_n, "number of episodes");
  auto* ev_init = ev->add_option("--init", eval_init, "initial-state box, e.g. \"-0.78:0.78,-0.5:0.5\"");
  auto* ev_thr = ev->add_option("--threshold", eval_thr, "stabilization radius on the state deviation");
  auto* ev_seed = ev->add_option("--seed", eval_seed, "seed for initial states (default: config seed)");
  ev->add_option("-o,--output-dir", eval_out, "output directory (default: <checkpoint dir>/eval)");
  ev->add_option("--env", eval_env, "JSON object merged into the environment block, e.g. '{\"path\":\"unseen\"}'");

  CertifyOptions cert;
  double cert_a = 0.0, cert_eps = 0.0;
  std::string cert_mode, cert_plane, cert_out;
  std::size_t cert_cells = 0;
  auto* ce = app.add_subcommand("certify", "almost-Lyapunov certification of a checkpoint's critic");
  ce->add_option("-k,--checkpoint", cert.checkpoint, "checkpoint bundle")->required();
  auto* ce_a = ce->add_option("--a", cert_a, "decay constant a");
  auto* ce_eps = ce->add_option("--eps-vol", cert_eps, "largest admissible violation-component volume");
  auto* ce_mode = ce->add_option("--mode", cert_mode, "grid | slice | mc");
  auto* ce_plane = ce->add_option("--plane", cert_plane, "slice plane, e.g. \"0,1\"");
  auto* ce_cells = ce->add_option("--max-cells", cert_cells, "grid cell budget");
  ce->add_option("-o,--output-dir", cert_out, "output directory (default: checkpoint dir)");

  CompareOptions cmp;
  std::string cmp_plane = "0,1", cmp_out;
  double cmp_a = 0.0;
  std::size_t cmp_cells = 0;
  bool no_lqr = false;
  auto* co = app.add_subcommand("compare", "side-by-side landscapes of several checkpoints plus an LQR candidate");
  co->add_option("-k,--checkpoint", cmp.checkpoints, "checkpoint bundle (repeatable)")->required();
  co->add_option("--plane", cmp_plane, "plane, e.g. \"0,1\"");
  auto* co_a = co->add_option("--a", cmp_a, "decay constant a");
  auto* co_cells = co->add_option("--max-cells", cmp_cells, "grid cell budget per panel");
  co->add_flag("--no-lqr", no_lqr, "omit the LQR quadratic panel");
  co->add_option("-o,--output-dir", cmp_out, "output directory (default: first checkpoint's dir)");

  std::string fixture_out;
  auto* fx = app.add_subcommand("make-fixture", "write the analytic linear-system bundle");
  fx->add_option("-o,--output", fixture_out, "bundle path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*tr) {
      if (!train_out.empty()) train.output_dir = train_out;
      return cmd_train(train);
    }
    if (*ev) {
      if (*ev_n) eval.episodes = eval_n;
      if (*ev_init) eval.init_region = parse_box(eval_init);
      if (*ev_thr) eval.threshold = eval_thr;
      if (*ev_seed) eval.seed = eval_seed;
      if (!eval_out.empty()) eval.output_dir = eval_out;
      if (!eval_env.empty()) {
        try {
          eval.env_overrides = nlohmann::json::parse(eval_env);
        } catch (const std::exception& e) {
          throw polyc::ConfigError(std::string("--env: ") + e.what());
        }
        if (!eval.env_overrides.is_object()) throw polyc::ConfigError("--env must be a JSON object");
      }
      return cmd_eval(eval);
    }
    if (*ce) {
      if (*ce_a) cert.a_const = cert_a;
      if (*ce_eps) cert.epsilon_volume = cert_eps;
      if (*ce_mode) cert.mode = polyc::validator::certify_mode_from_string(cert_mode);
      if (*ce_plane) cert.plane = parse_plane(cert_plane);
      if (*ce_cells) cert.max_cells = cert_cells;
      if (!cert_out.empty()) cert.output_dir = cert_out;
      return cmd_certify(cert);
    }
    if (*co) {
      cmp.plane = parse_plane(cmp_plane);
      if (*co_a) cmp.a_const = cmp_a;
      if (*co_cells) cmp.max_cells = cmp_cells;
      cmp.include_lqr = !no_lqr;
      if (!cmp_out.empty()) cmp.output_dir = cmp_out;
      return cmd_compare(cmp);
    }
    if (*fx) return cmd_make_fixture(fixture_out);
  } catch (const polyc::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kUsageError;
}
