#include "polyc/envs/path_tracking.hpp"

#include "polyc/json_util.hpp"

#include <algorithm>
#include <cmath>

namespace polyc::envs {

Path::Path(std::vector<Segment> segments) : segments_(std::move(segments)) {
  for (const auto& seg : segments_) {
    if (!(seg.length > 0.0)) throw ConfigError("path segment length must be positive");
  }
}

Path Path::training() { return Path({{15.0, 0.0}, {200.0, 0.05}}); }

Path Path::unseen() {
  return Path({{10.0, 0.0},
               {20.0, 0.08},
               {20.0, -0.08},
               {20.0, 0.08},
               {20.0, -0.08},
               {20.0, 0.08},
               {200.0, -0.08}});
}

Path Path::straight() { return Path({{1.0, 0.0}}); }

Path Path::circle(double curvature) { return Path({{1.0, curvature}}); }

double Path::curvature_at(double arc_length) const {
  if (segments_.empty()) return 0.0;
  double start = 0.0;
  for (const auto& seg : segments_) {
    if (arc_length < start + seg.length) return seg.curvature;
    start += seg.length;
  }
  return segments_.back().curvature;
}

double Path::total_length() const {
  double total = 0.0;
  for (const auto& seg : segments_) total += seg.length;
  return total;
}

nlohmann::json Path::to_json() const {
  auto j = nlohmann::json::array();
  for (const auto& seg : segments_) j.push_back({{"length", seg.length}, {"curvature", seg.curvature}});
  return j;
}

Path Path::from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "training") return training();
    if (name == "unseen") return unseen();
    if (name == "straight") return straight();
    throw ConfigError("unknown named path '" + name + "'");
  }
  std::vector<Segment> segs;
  for (const auto& s : j) {
    check_keys(s, {"length", "curvature"}, "path segment");
    segs.push_back({s.at("length").get<double>(), s.at("curvature").get<double>()});
  }
  return Path(std::move(segs));
}

PathTracking::PathTracking() : PathTracking(Params{}, Path::training()) {}

PathTracking::PathTracking(Params p, Path path) : p_(p), path_(std::move(path)) {
  if (!(p_.dt > 0.0) || p_.horizon <= 0 || !(p_.wheelbase > 0.0)) {
    throw ConfigError("path_tracking: dt, horizon and wheelbase must be positive");
  }
  init_region_ = {{-1.0, 1.0}, {-0.5, 0.5}, {4.0, 6.0}, {4.0, 6.0}};
}

Box PathTracking::domain() const { return {{-3.0, 3.0}, {-1.5, 1.5}, {0.0, 10.0}, {0.0, 10.0}}; }

Box PathTracking::action_bounds() const { return {{-p_.max_accel, p_.max_accel}, {-p_.max_steer, p_.max_steer}}; }

Vec PathTracking::equilibrium() const {
  Vec e(4);
  e << 0.0, 0.0, p_.nominal_speed, p_.nominal_speed;
  return e;
}

StepResult PathTracking::step(const Vec& s, const Vec& a, EpisodeClock& clock) const {
  require_dim(s.size(), 4, "PathTracking state");
  require_dim(a.size(), 2, "PathTracking action");
  const double accel = std::clamp(a[0], -p_.max_accel, p_.max_accel);
  const double steer = std::clamp(a[1], -p_.max_steer, p_.max_steer);
  const double de = s[0];
  const double the = s[1];
  const double v = s[2];
  const double kappa = path_.curvature_at(clock.progress);

  StepResult out;
  out.next = s;
  const double denom = 1.0 - kappa * de;
  if (std::abs(denom) < kSingularityGuard) {
    out.done = true;
    return out;
  }
  const double de_dot = v * std::sin(the);
  const double the_dot = v / p_.wheelbase * std::tan(steer) - kappa * v * std::cos(the) / denom;
  const double progress_dot = v * std::cos(the) / denom;
  out.next[0] = de + p_.dt * de_dot;
  out.next[1] = the + p_.dt * the_dot;
  out.next[2] = v + p_.dt * accel;
  clock.progress += p_.dt * progress_dot;
  clock.t += p_.dt;
  ++clock.steps;
  if (std::abs(1.0 - path_.curvature_at(clock.progress) * out.next[0]) < kSingularityGuard) out.done = true;
  return out;
}

double PathTracking::reward(const Vec& s, const Vec& a, const EpisodeClock&) const {
  const Vec u = clamp_action(a);
  const double dv = s[2] - s[3];
  return -(s[0] * s[0] + 0.5 * s[1] * s[1] + 0.1 * dv * dv + 0.01 * u.squaredNorm());
}

nlohmann::json PathTracking::to_json() const {
  return {{"name", "path_tracking"},
          {"wheelbase", p_.wheelbase},
          {"dt", p_.dt},
          {"horizon", p_.horizon},
          {"max_accel", p_.max_accel},
          {"max_steer", p_.max_steer},
          {"nominal_speed", p_.nominal_speed},
          {"path", path_.to_json()},
          {"termination_penalty", termination_penalty_},
          {"init_region", box_to_json(init_region_)}};
}

PathTracking PathTracking::from_json(const nlohmann::json& j) {
  check_keys(j, {"name", "wheelbase", "dt", "horizon", "max_accel", "max_steer", "nominal_speed", "path",
                 "termination_penalty", "init_region"},
             "env(path_tracking)");
  Params p;
  p.wheelbase = get_or(j, "wheelbase", p.wheelbase);
  p.dt = get_or(j, "dt", p.dt);
  p.horizon = get_or(j, "horizon", p.horizon);
  p.max_accel = get_or(j, "max_accel", p.max_accel);
  p.max_steer = get_or(j, "max_steer", p.max_steer);
  p.nominal_speed = get_or(j, "nominal_speed", p.nominal_speed);
  Path path = j.contains("path") ? Path::from_json(j.at("path")) : Path::training();
  PathTracking env(p, std::move(path));
  env.set_termination_penalty(get_or(j, "termination_penalty", 0.0));
  if (j.contains("init_region")) env.set_init_region(box_from_json(j.at("init_region")));
  return env;
}

}  // namespace polyc::envs
