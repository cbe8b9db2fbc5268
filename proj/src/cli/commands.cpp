#include "polyc/cli/commands.hpp"

#include "polyc/cli/io.hpp"
#include "polyc/cli/lqr.hpp"
#include "polyc/envs/pendulum.hpp"
#include "polyc/json_util.hpp"
#include "polyc/validator/eps_net.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

namespace polyc::cli {

namespace fs = std::filesystem;
using validator::CertifyMode;

namespace {

constexpr std::size_t kLandscapeCells = 14400;  // 120 x 120

std::unique_ptr<envs::Env> bundle_env(const Bundle& b, const nlohmann::json& overrides) {
  nlohmann::json cfg = b.config.env;
  cfg.merge_patch(b.config.eval.env_overrides);
  cfg.merge_patch(overrides);
  try {
    return envs::make_env(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("environment: ") + e.what());
  }
}

std::string csv_row(const std::vector<double>& xs) {
  std::string out;
  char buf[40];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", xs[i]);
    if (i) out += ',';
    out += buf;
  }
  return out;
}

Box restrict_box(const Box& box, const std::vector<int>& dims) {
  Box out;
  for (int d : dims) out.push_back(box[static_cast<std::size_t>(d)]);
  return out;
}

}  // namespace

nlohmann::json Analysis::report_json() const {
  auto j = report.to_json();
  if (monte_carlo) {
    j["monte_carlo"] = {{"samples_drawn", monte_carlo->drawn},
                        {"samples_in_band", monte_carlo->samples},
                        {"violations", monte_carlo->violations},
                        {"fraction", monte_carlo->fraction},
                        {"ci95", {monte_carlo->ci_low, monte_carlo->ci_high}}};
  }
  return j;
}

Analysis analyze(const envs::Env& env, const nn::GaussianPolicy& policy, const Candidate& candidate,
                 const ValidatorConfig& vc, std::uint64_t seed, const std::string& title) {
  const int n = env.state_dim();
  if (candidate.state_dim() != n) throw ConfigError("candidate dimension does not match the environment");
  const CertifyMode mode = vc.mode.value_or(n <= 4 ? CertifyMode::full_grid : CertifyMode::slice);
  if (mode == CertifyMode::full_grid && n > 4) {
    throw ConfigError("full-grid certification is limited to 4 state dimensions (state has " + std::to_string(n) +
                      "); use --mode slice or --mode mc");
  }
  for (int d : vc.plane) {
    if (d >= n) throw ConfigError("plane dimension " + std::to_string(d) + " is outside the state");
  }
  const Box box = vc.box.value_or(env.domain());
  require_dim(static_cast<Eigen::Index>(box.size()), n, "validator box");
  const Vec anchor = vc.anchor.value_or(env.equilibrium());
  require_dim(anchor.size(), n, "validator anchor");
  for (int d = 0; d < n; ++d) {
    if (!box[static_cast<std::size_t>(d)].contains(anchor[d])) throw ConfigError("validator anchor lies outside the box");
  }

  const auto loop = validator::closed_loop(env, [&env, &policy](const Vec& s) { return policy::mean_action(env, policy, s); });
  const auto v = candidate.field();
  Rng rng(seed);

  validator::Embedding emb;
  if (mode == CertifyMode::full_grid) {
    emb = validator::Embedding::identity(n);
  } else {
    emb.free_dims = vc.plane;
    emb.anchor = anchor;
  }
  const Box grid_box = mode == CertifyMode::full_grid ? box : restrict_box(box, vc.plane);
  const double lip = validator::estimate_lipschitz(v, loop, grid_box, vc.lipschitz_samples, rng, &emb);
  validator::EpsNet net;
  if (vc.margin && lip > 0.0) {
    try {
      net = validator::build_eps_net(grid_box, lip, *vc.margin, vc.max_cells);
    } catch (const validator::BudgetError& e) {
      throw ConfigError(e.what());
    }
  } else {
    net = validator::budget_eps_net(grid_box, vc.max_cells);
  }
  const auto field = validator::evaluate_cells(v, loop, net, emb, candidate.origin);
  const double eps_vol = vc.epsilon_volume.value_or(10.0 * net.cell_volume());
  validator::BandSearchConfig bs;
  bs.levels = vc.band_levels;

  Analysis out;
  out.report = validator::certify_band(field, vc.a_const, eps_vol, bs);
  out.report.mode = mode;
  out.report.certifying = mode == CertifyMode::full_grid;
  out.report.lipschitz_estimate = lip;
  out.report.achieved_margin = 0.5 * lip * net.cell_diameter();
  if (candidate.mlp && candidate.mlp->net.activation() == nn::Activation::relu) {
    out.report.note += (out.report.note.empty() ? "" : "; ") + std::string("relu critic is not continuously differentiable");
  }
  if (mode == CertifyMode::monte_carlo) {
    out.monte_carlo =
        validator::monte_carlo_validate(v, loop, box, vc.a_const, vc.mc_samples, rng, out.report.band);
    out.report.certified = false;
  }

  // Landscape on the plane, reusing the certification grid when it is small.
  validator::CellField plane_field;
  if (net.dims() == 2 && net.total_cells() <= kLandscapeCells && emb.free_dims == vc.plane) {
    plane_field = field;
  } else {
    validator::Embedding pe;
    pe.free_dims = vc.plane;
    pe.anchor = anchor;
    const auto pnet = validator::budget_eps_net(restrict_box(box, vc.plane), std::min(vc.max_cells, kLandscapeCells));
    plane_field = validator::evaluate_cells(v, loop, pnet, pe, candidate.origin);
  }
  out.landscape = validator::landscape_map(plane_field, vc.a_const, out.report, title);
  return out;
}

Candidate lqr_candidate(const envs::Env& env) {
  const auto lin = linearize(env, env.equilibrium(), env.equilibrium_action());
  const int n = env.state_dim();
  const auto res = lqr(lin.a, lin.b, Mat::Identity(n, n), Mat::Identity(env.action_dim(), env.action_dim()));
  return Candidate::quadratic(res.p, env.equilibrium());
}

EvalSummary evaluate(const Bundle& bundle, const EvalOptions& opts, const fs::path& out_dir) {
  auto env = bundle_env(bundle, opts.env_overrides);
  const auto& ec = bundle.config.eval;
  const std::size_t episodes = opts.episodes.value_or(ec.episodes);
  const double threshold = opts.threshold.value_or(ec.threshold);
  if (episodes == 0) throw ConfigError("episode count must be positive");
  if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
  Box init = opts.init_region ? *opts.init_region : ec.init_region.value_or(env->init_region());
  if (static_cast<int>(init.size()) != env->state_dim()) {
    throw ConfigError("init region has " + std::to_string(init.size()) + " dimensions, state has " +
                      std::to_string(env->state_dim()));
  }
  env->set_init_region(init);
  Rng rng(opts.seed.value_or(bundle.config.seed));
  const bool pendulum = env->name() == "pendulum";
  const int n = env->state_dim();
  const int m = env->action_dim();

  std::string header = "t";
  for (int i = 0; i < n; ++i) header += ",s_" + std::to_string(i);
  for (int i = 0; i < m; ++i) header += ",a_" + std::to_string(i);
  header += ",r\n";

  EvalSummary sum;
  sum.episodes = episodes;
  auto per_episode = nlohmann::json::array();
  std::size_t stabilized = 0;
  double sq_err = 0.0;
  std::size_t err_count = 0;
  double total_return = 0.0;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    envs::EpisodeClock clock;
    Vec s = env->reset(rng, clock);
    const Vec start = s;
    std::string csv = header;
    int wraps = 0;
    int reach_step = -1;
    bool terminated = false;
    double ret = 0.0;
    double ep_sq = 0.0;
    int steps = 0;
    for (int t = 0; t < env->horizon(); ++t) {
      if (reach_step < 0 && env->deviation(s).norm() < threshold) reach_step = t;
      const double e = env->tracking_error(s);
      ep_sq += e * e;
      const Vec a = policy::mean_action(*env, bundle.policy, s);
      const double time = clock.t;
      const double r = env->reward(s, a, clock);
      const auto res = env->step(s, a, clock);
      std::vector<double> row{time};
      for (int i = 0; i < n; ++i) row.push_back(s[i]);
      for (int i = 0; i < m; ++i) row.push_back(a[i]);
      row.push_back(r);
      csv += csv_row(row) + "\n";
      if (pendulum && envs::Pendulum::wrapped(s[0], res.next[0])) ++wraps;
      ret += r;
      ++steps;
      s = res.next;
      if (res.done) {
        terminated = true;
        break;
      }
    }
    if (reach_step < 0 && !terminated && env->deviation(s).norm() < threshold) reach_step = steps;
    const bool ok = reach_step >= 0 && wraps == 0 && !terminated;
    if (ok) ++stabilized;
    if (wraps > 0) ++sum.wrap_episodes;
    sq_err += ep_sq;
    err_count += static_cast<std::size_t>(steps);
    total_return += ret;
    char name[32];
    std::snprintf(name, sizeof name, "traj_%04zu.csv", ep);
    write_atomic(out_dir / "trajectories" / name, csv);
    per_episode.push_back({{"episode", ep},
                           {"start", vec_to_json(start)},
                           {"reach_step", reach_step},
                           {"stabilized", ok},
                           {"wrap_events", wraps},
                           {"terminated", terminated},
                           {"final_deviation", env->deviation(s).norm()},
                           {"tracking_rms", std::sqrt(ep_sq / std::max(steps, 1))},
                           {"return", ret}});
  }
  sum.stabilized_fraction = static_cast<double>(stabilized) / static_cast<double>(episodes);
  sum.tracking_rms = std::sqrt(sq_err / static_cast<double>(std::max<std::size_t>(err_count, 1)));
  sum.mean_return = total_return / static_cast<double>(episodes);
  sum.details = {{"env", env->to_json()},
                 {"episodes", episodes},
                 {"threshold", threshold},
                 {"init_region", box_to_json(init)},
                 {"stabilized_fraction", sum.stabilized_fraction},
                 {"wrap_episodes", sum.wrap_episodes},
                 {"tracking_rms", sum.tracking_rms},
                 {"mean_return", sum.mean_return},
                 {"per_episode", per_episode}};
  write_json(out_dir / "eval_summary.json", sum.details);
  return sum;
}

int cmd_train(const TrainOptions& opts) {
  RunConfig cfg;
  try {
    cfg = load_run_config(opts.config);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  const fs::path out = opts.output_dir.value_or(fs::path(cfg.output_dir));
  auto env = envs::make_env(cfg.env);
  std::string metrics = policy::metrics_csv_header() + "\n";
  std::optional<policy::Agent> last;
  policy::TrainHooks hooks;
  hooks.on_iteration = [&](const policy::Agent& agent, const policy::IterationMetrics& m) {
    last = agent;
    metrics += policy::metrics_csv_row(m) + "\n";
    write_atomic(out / "metrics.csv", metrics);
    if (cfg.checkpoint_interval > 0 && m.iter % cfg.checkpoint_interval == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "iter_%05d.json", m.iter);
      save_bundle(out / "checkpoints" / name, Bundle::from_agent(cfg, agent));
    }
    if (!opts.quiet) {
      std::printf("iter %4d  return %10.3f  risk %9.5f  lie %9.5f  clip %.3f  beta %.3f  entropy %.3f\n", m.iter,
                  m.mean_return, m.lyapunov_risk, m.mean_lie, m.clip_frac, m.beta, m.entropy);
      std::fflush(stdout);
    }
  };
  write_json(out / "config.json", cfg.to_json());
  try {
    auto result = policy::polyc_train(*env, cfg.algo, cfg.critic, cfg.seed, hooks);
    write_atomic(out / "metrics.csv", metrics);
    save_bundle(out / "bundle.json", Bundle::from_agent(cfg, result.agent));
  } catch (const std::exception& e) {
    std::cerr << "error: training aborted: " << e.what() << "\n";
    if (last) {
      save_bundle(out / "partial_bundle.json", Bundle::from_agent(cfg, *last));
      std::cerr << "last completed iteration saved to " << (out / "partial_bundle.json").string() << "\n";
    }
    return kRuntimeFailure;
  }
  std::printf("wrote %s\n", (out / "bundle.json").string().c_str());
  return kOk;
}

int cmd_eval(const EvalOptions& opts) {
  Bundle b;
  try {
    b = load_bundle(opts.checkpoint);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  const fs::path out = opts.output_dir.value_or(opts.checkpoint.parent_path() / "eval");
  try {
    const auto s = evaluate(b, opts, out);
    std::printf("episodes %zu  stabilized %.3f  wrap episodes %zu  tracking rms %.4f  mean return %.3f\n", s.episodes,
                s.stabilized_fraction, s.wrap_episodes, s.tracking_rms, s.mean_return);
    std::printf("wrote %s\n", (out / "eval_summary.json").string().c_str());
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}

namespace {

void print_verdict(const Analysis& a) {
  const auto& r = a.report;
  std::printf("%s  mode %s  band [%.6g, %.6g]  a %.4g  eps_vol %.4g  components %zu  violation fraction %.4f%s\n",
              r.certified ? "CERTIFIED" : "NOT CERTIFIED", validator::to_string(r.mode).c_str(), r.band.c1, r.band.c2,
              r.a_const, r.epsilon_volume, r.components.size(), r.violation_fraction,
              r.positivity_ok ? "" : "  (positivity check failed)");
  if (a.monte_carlo) {
    std::printf("monte-carlo (non-certifying): %zu/%zu in-band samples violate, fraction %.4f, 95%% CI [%.4f, %.4f]\n",
                a.monte_carlo->violations, a.monte_carlo->samples, a.monte_carlo->fraction, a.monte_carlo->ci_low,
                a.monte_carlo->ci_high);
  }
}

}  // namespace

int cmd_certify(const CertifyOptions& opts) {
  try {
    const Bundle b = load_bundle(opts.checkpoint);
    ValidatorConfig vc = b.config.validator;
    if (opts.a_const) vc.a_const = *opts.a_const;
    if (opts.epsilon_volume) vc.epsilon_volume = *opts.epsilon_volume;
    if (opts.mode) vc.mode = *opts.mode;
    if (opts.plane) vc.plane = *opts.plane;
    if (opts.max_cells) vc.max_cells = *opts.max_cells;
    vc.validate();
    auto env = bundle_env(b, nlohmann::json::object());
    const fs::path out = opts.output_dir.value_or(opts.checkpoint.parent_path());
    const auto analysis = analyze(*env, b.policy, b.critic, vc, b.config.seed, opts.checkpoint.stem().string());
    write_json(out / "report.json", analysis.report_json());
    write_json(out / "landscape.json", analysis.landscape.to_json());
    write_atomic(out / "landscape.svg", validator::render_svg({analysis.landscape}));
    print_verdict(analysis);
    std::printf("wrote %s\n", (out / "report.json").string().c_str());
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}

int cmd_compare(const CompareOptions& opts) {
  try {
    if (opts.checkpoints.empty()) throw ConfigError("compare needs at least one checkpoint");
    std::vector<Bundle> bundles;
    for (const auto& p : opts.checkpoints) bundles.push_back(load_bundle(p));
    const auto env = bundle_env(bundles.front(), nlohmann::json::object());
    for (std::size_t i = 1; i < bundles.size(); ++i) {
      const auto other = bundle_env(bundles[i], nlohmann::json::object());
      if (other->name() != env->name() || other->state_dim() != env->state_dim()) {
        throw ConfigError("mismatched environments: '" + env->name() + "' vs '" + other->name() + "'");
      }
    }
    ValidatorConfig vc = bundles.front().config.validator;
    vc.plane = opts.plane;
    if (opts.a_const) vc.a_const = *opts.a_const;
    if (opts.max_cells) vc.max_cells = *opts.max_cells;
    if (env->state_dim() > 2 || vc.plane != std::vector<int>{0, 1}) vc.mode = CertifyMode::slice;
    vc.validate();

    std::vector<Analysis> panels;
    std::vector<std::string> sources;
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      panels.push_back(analyze(*env, bundles[i].policy, bundles[i].critic, vc, bundles[i].config.seed,
                               opts.checkpoints[i].stem().string()));
      sources.push_back(opts.checkpoints[i].string());
    }
    if (opts.include_lqr) {
      panels.push_back(analyze(*env, bundles.front().policy, lqr_candidate(*env), vc, bundles.front().config.seed,
                               "LQR quadratic"));
      sources.push_back("lqr:" + opts.checkpoints.front().string());
    }

    // Violations of every candidate inside the first panel's certified band.
    const auto& ref = panels.front();
    auto panels_json = nlohmann::json::array();
    for (std::size_t i = 0; i < panels.size(); ++i) {
      nlohmann::json in_ref = nullptr;
      if (ref.report.certified) {
        std::size_t count = 0;
        const auto& rf = ref.landscape.field;
        for (std::size_t c = 0; c < rf.v.size(); ++c) {
          if (rf.v[c] >= ref.report.band.c1 && rf.v[c] <= ref.report.band.c2 && !panels[i].landscape.condition[c]) {
            ++count;
          }
        }
        in_ref = count;
      }
      panels_json.push_back({{"title", panels[i].landscape.title},
                             {"source", sources[i]},
                             {"report", panels[i].report_json()},
                             {"violating_in_reference_band", in_ref},
                             {"landscape", panels[i].landscape.to_json()}});
    }
    std::vector<validator::Landscape> maps;
    for (const auto& p : panels) maps.push_back(p.landscape);
    const fs::path out = opts.output_dir.value_or(opts.checkpoints.front().parent_path());
    write_json(out / "compare.json", {{"env", env->name()},
                                      {"plane", vc.plane},
                                      {"a_const", vc.a_const},
                                      {"reference_certified", ref.report.certified},
                                      {"panels", panels_json}});
    write_atomic(out / "compare.svg", validator::render_svg(maps));
    for (const auto& p : panels) {
      std::printf("%-24s ", p.landscape.title.c_str());
      print_verdict(p);
    }
    std::printf("wrote %s\n", (out / "compare.json").string().c_str());
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}

int cmd_make_fixture(const fs::path& out) {
  try {
    save_bundle(out, make_linear_fixture());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  std::printf("wrote %s\n", out.string().c_str());
  return kOk;
}

}  // namespace polyc::cli
