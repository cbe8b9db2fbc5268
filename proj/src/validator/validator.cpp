#include "polyc/validator/validator.hpp"

#include "polyc/json_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace polyc::validator {

ClosedLoop closed_loop(const envs::Env& env, std::function<Vec(const Vec&)> action) {
  const envs::Env* e = &env;
  return {[e, action = std::move(action)](const Vec& x) {
            envs::EpisodeClock clock;
            return e->step(x, action(x), clock).next;
          },
          env.dt()};
}

Vec Embedding::embed(const Vec& y) const {
  require_dim(y.size(), static_cast<Eigen::Index>(free_dims.size()), "Embedding::embed");
  Vec x = anchor;
  for (std::size_t i = 0; i < free_dims.size(); ++i) x[free_dims[i]] = y[static_cast<Eigen::Index>(i)];
  return x;
}

Embedding Embedding::identity(int n) {
  Embedding e;
  e.free_dims.resize(static_cast<std::size_t>(n));
  std::iota(e.free_dims.begin(), e.free_dims.end(), 0);
  e.anchor = Vec::Zero(n);
  return e;
}

bool Embedding::is_identity() const {
  if (static_cast<Eigen::Index>(free_dims.size()) != anchor.size()) return false;
  for (std::size_t i = 0; i < free_dims.size(); ++i) {
    if (free_dims[i] != static_cast<int>(i)) return false;
  }
  return true;
}

PointEval evaluate_point(const ScalarField& v, const ClosedLoop& loop, const Vec& x) {
  PointEval out;
  out.v = v(x);
  try {
    const Vec next = loop.step(x);
    out.lie = (v(next) - out.v) / loop.dt;
    if (!std::isfinite(out.lie)) out.failed = true;
  } catch (const std::exception&) {
    out.failed = true;
  }
  if (out.failed) out.lie = std::numeric_limits<double>::infinity();
  return out;
}

CellField evaluate_cells(const ScalarField& v, const ClosedLoop& loop, const EpsNet& net, const Embedding& embedding,
                         const Vec& origin) {
  require_dim(static_cast<Eigen::Index>(embedding.free_dims.size()), static_cast<Eigen::Index>(net.dims()),
              "evaluate_cells embedding");
  if (!(loop.dt > 0.0)) throw std::invalid_argument("evaluate_cells: dt must be positive");
  CellField f;
  f.net = net;
  f.embedding = embedding;
  f.v.resize(net.total_cells());
  f.lie.resize(net.total_cells());
  f.failed.resize(net.total_cells());
  for (std::size_t c = 0; c < net.total_cells(); ++c) {
    const auto pe = evaluate_point(v, loop, embedding.embed(net.center(c)));
    f.v[c] = pe.v;
    f.lie[c] = pe.lie;
    f.failed[c] = pe.failed;
  }
  f.v_origin = v(origin);
  return f;
}

bool positivity_check(const CellField& field, double tol) {
  double vmax = -std::numeric_limits<double>::infinity();
  for (double x : field.v) {
    if (!(x >= -tol)) return false;
    vmax = std::max(vmax, x);
  }
  return field.v_origin <= 1e-3 * vmax;
}

CellClassification classify(const CellField& field, double a_const, Band band) {
  if (!(a_const > 0.0)) throw std::invalid_argument("classify: a must be positive");
  if (!(band.c1 < band.c2)) throw std::invalid_argument("classify: band needs c1 < c2");
  CellClassification cls;
  cls.band = band;
  cls.a_const = a_const;
  cls.labels.assign(field.v.size(), CellLabel::outside_band);
  cls.positivity_ok = positivity_check(field);
  cls.min_v_in_band = std::numeric_limits<double>::infinity();
  cls.max_lie_in_band = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < field.v.size(); ++c) {
    const double v = field.v[c];
    if (v < band.c1 || v > band.c2) continue;
    ++cls.in_band;
    cls.min_v_in_band = std::min(cls.min_v_in_band, v);
    cls.max_lie_in_band = std::max(cls.max_lie_in_band, field.lie[c]);
    if (field.failed[c] || field.lie[c] >= -a_const * v) {
      cls.labels[c] = CellLabel::violating;
      ++cls.violating;
    } else {
      cls.labels[c] = CellLabel::satisfying;
    }
  }
  return cls;
}

CellClassification classify_cells(const ScalarField& v, const ClosedLoop& loop, const EpsNet& net, double a_const,
                                  Band band, const Vec& origin, const Embedding& embedding) {
  return classify(evaluate_cells(v, loop, net, embedding, origin), a_const, band);
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<Component> connected_components(const EpsNet& net, const std::vector<CellLabel>& labels) {
  if (labels.size() != net.total_cells()) throw DimensionError("connected_components: label count mismatch");
  UnionFind uf(labels.size());
  // Strides of the row-major layout.
  std::vector<std::size_t> stride(net.dims(), 1);
  for (std::size_t d = net.dims() - 1; d-- > 0;) stride[d] = stride[d + 1] * net.counts()[d + 1];
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (labels[c] != CellLabel::violating) continue;
    const auto idx = net.unflatten(c);
    for (std::size_t d = 0; d < net.dims(); ++d) {
      if (idx[d] + 1 < net.counts()[d]) {
        const std::size_t nb = c + stride[d];
        if (labels[nb] == CellLabel::violating) uf.unite(c, nb);
      }
    }
  }
  std::vector<Component> comps;
  std::vector<std::size_t> root_to_comp(labels.size(), std::numeric_limits<std::size_t>::max());
  const double cell_vol = net.cell_volume();
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (labels[c] != CellLabel::violating) continue;
    const auto r = uf.find(c);
    if (root_to_comp[r] == std::numeric_limits<std::size_t>::max()) {
      root_to_comp[r] = comps.size();
      Component comp;
      comp.bbox.assign(net.dims(), Interval{std::numeric_limits<double>::infinity(),
                                            -std::numeric_limits<double>::infinity()});
      comps.push_back(comp);
    }
    auto& comp = comps[root_to_comp[r]];
    ++comp.cells;
    const Vec ctr = net.center(c);
    for (std::size_t d = 0; d < net.dims(); ++d) {
      const auto k = static_cast<Eigen::Index>(d);
      comp.bbox[d].lo = std::min(comp.bbox[d].lo, ctr[k] - 0.5 * net.cell_width()[k]);
      comp.bbox[d].hi = std::max(comp.bbox[d].hi, ctr[k] + 0.5 * net.cell_width()[k]);
    }
  }
  for (auto& comp : comps) comp.volume = static_cast<double>(comp.cells) * cell_vol;
  return comps;
}

double estimate_lipschitz(const ScalarField& v, const ClosedLoop& loop, const Box& box, std::size_t samples, Rng& rng,
                          const Embedding* embedding) {
  if (samples < 100) throw std::invalid_argument("estimate_lipschitz: need at least 100 samples");
  for (const auto& iv : box) {
    if (!(iv.width() > 0.0)) throw std::invalid_argument("estimate_lipschitz: degenerate box");
  }
  constexpr double kStep = 1e-3;
  constexpr double kSafety = 2.0;
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(box.size());
  auto lift = [&](const Vec& y) { return embedding ? embedding->embed(y) : y; };
  double best = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec y = box_sample(box, rng);
    Vec dir(n);
    for (Eigen::Index k = 0; k < n; ++k) dir[k] = normal(rng);
    const double nrm = dir.norm();
    if (nrm == 0.0) continue;
    const Vec y2 = y + dir * (kStep / nrm);
    const auto p1 = evaluate_point(v, loop, lift(y));
    const auto p2 = evaluate_point(v, loop, lift(y2));
    if (p1.failed || p2.failed) continue;
    best = std::max(best, std::abs(p2.lie - p1.lie) / kStep);
  }
  return kSafety * best;
}

std::string to_string(CertifyMode m) {
  switch (m) {
    case CertifyMode::full_grid:
      return "full-grid";
    case CertifyMode::slice:
      return "slice";
    case CertifyMode::monte_carlo:
      return "monte-carlo";
  }
  return "unknown";
}

CertifyMode certify_mode_from_string(const std::string& s) {
  if (s == "grid" || s == "full-grid") return CertifyMode::full_grid;
  if (s == "slice") return CertifyMode::slice;
  if (s == "mc" || s == "monte-carlo") return CertifyMode::monte_carlo;
  throw ConfigError("unknown certification mode '" + s + "'");
}

namespace {

nlohmann::json num(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

nlohmann::json CertificationReport::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components) {
    comps.push_back({{"cells", c.cells}, {"volume", c.volume}, {"bbox", box_to_json(c.bbox)}});
  }
  return {{"certified", certified},
          {"certifying", certifying},
          {"mode", to_string(mode)},
          {"band", {num(band.c1), num(band.c2)}},
          {"a_const", a_const},
          {"epsilon_volume", epsilon_volume},
          {"components", comps},
          {"violation_fraction", violation_fraction},
          {"positivity_ok", positivity_ok},
          {"min_V_in_band", num(min_v_in_band)},
          {"max_lie_in_band", num(max_lie_in_band)},
          {"cells_in_band", cells_in_band},
          {"violating_cells", violating_cells},
          {"grid",
           {{"box", box_to_json(box)},
            {"counts", counts},
            {"free_dims", free_dims},
            {"anchor", vec_to_json(anchor)},
            {"cell_volume", cell_volume}}},
          {"lipschitz_estimate", lipschitz_estimate},
          {"achieved_margin", achieved_margin},
          {"V_origin", v_origin},
          {"bands_tried", bands_tried},
          {"note", note}};
}

bool report_consistent(const nlohmann::json& r) {
  if (!r.at("certified").get<bool>()) return true;
  const double eps = r.at("epsilon_volume").get<double>();
  for (const auto& c : r.at("components")) {
    if (c.at("volume").get<double>() > eps) return false;
  }
  if (!r.at("positivity_ok").get<bool>()) return false;
  const auto& min_v = r.at("min_V_in_band");
  const auto& max_lie = r.at("max_lie_in_band");
  if (min_v.is_null() || max_lie.is_null()) return false;
  return max_lie.get<double>() < r.at("a_const").get<double>() * min_v.get<double>();
}

CertificationReport assess_band(const CellField& field, double a_const, double epsilon_volume, Band band) {
  const auto cls = classify(field, a_const, band);
  CertificationReport rep;
  rep.band = band;
  rep.a_const = a_const;
  rep.epsilon_volume = epsilon_volume;
  rep.positivity_ok = cls.positivity_ok;
  rep.cells_in_band = cls.in_band;
  rep.violating_cells = cls.violating;
  rep.min_v_in_band = cls.min_v_in_band;
  rep.max_lie_in_band = cls.max_lie_in_band;
  rep.violation_fraction = cls.in_band == 0 ? 0.0 : static_cast<double>(cls.violating) / static_cast<double>(cls.in_band);
  rep.components = connected_components(field.net, cls.labels);
  rep.box = field.net.box();
  rep.counts = field.net.counts();
  rep.free_dims = field.embedding.free_dims;
  rep.anchor = field.embedding.anchor;
  rep.cell_volume = field.net.cell_volume();
  rep.v_origin = field.v_origin;
  const bool volumes_ok = std::all_of(rep.components.begin(), rep.components.end(),
                                      [&](const Component& c) { return c.volume <= epsilon_volume; });
  const bool decrease_ok = cls.in_band > 0 && cls.max_lie_in_band < a_const * cls.min_v_in_band;
  rep.certified = volumes_ok && decrease_ok && cls.positivity_ok;
  return rep;
}

namespace {

double percentile(std::vector<double> xs, double pct) {
  std::sort(xs.begin(), xs.end());
  const double pos = pct / 100.0 * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(xs.size() - 1, lo + 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace

CertificationReport certify_band(const CellField& field, double a_const, double epsilon_volume,
                                 const BandSearchConfig& cfg) {
  if (field.v.empty()) throw std::invalid_argument("certify_band: empty field");
  if (cfg.levels < 2) throw std::invalid_argument("certify_band: need at least two levels");
  const double hi = percentile(field.v, cfg.high_percentile);
  double lo = percentile(field.v, cfg.low_percentile);
  if (!(hi > 0.0)) {
    CertificationReport rep = assess_band(field, a_const, epsilon_volume, {hi - 1.0, hi});
    rep.certified = false;
    rep.note = "V is nonpositive over most of the box; no positive sublevel band exists";
    return rep;
  }
  if (!(lo > 0.0)) lo = hi * 1e-4;
  if (!(lo < hi)) lo = hi * 0.5;
  std::vector<double> levels(static_cast<std::size_t>(cfg.levels));
  for (int k = 0; k < cfg.levels; ++k) {
    levels[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, static_cast<double>(k) / (cfg.levels - 1));
  }

  std::optional<CertificationReport> best_ok;
  std::optional<CertificationReport> best_fail;
  std::size_t tried = 0;
  for (int j = cfg.levels - 1; j >= 1; --j) {      // c2 from the top down
    for (int i = 0; i < j; ++i) {                  // c1 from the bottom up
      const Band band{levels[static_cast<std::size_t>(i)], levels[static_cast<std::size_t>(j)]};
      auto rep = assess_band(field, a_const, epsilon_volume, band);
      ++tried;
      const double width = band.c2 - band.c1;
      if (rep.certified) {
        if (!best_ok || width > best_ok->band.c2 - best_ok->band.c1) best_ok = std::move(rep);
      } else if (!best_fail || rep.violation_fraction < best_fail->violation_fraction ||
                 (rep.violation_fraction == best_fail->violation_fraction &&
                  width > best_fail->band.c2 - best_fail->band.c1)) {
        best_fail = std::move(rep);
      }
    }
  }
  CertificationReport out = best_ok ? *best_ok : *best_fail;
  out.bands_tried = tried;
  return out;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

MonteCarloResult monte_carlo_validate(const ScalarField& v, const ClosedLoop& loop, const Box& box, double a_const,
                                      std::size_t n_samples, Rng& rng, std::optional<Band> band,
                                      const Embedding* embedding) {
  if (n_samples < 1000) throw std::invalid_argument("monte_carlo_validate: need at least 1000 samples");
  MonteCarloResult res;
  res.drawn = n_samples;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vec y = box_sample(box, rng);
    const auto pe = evaluate_point(v, loop, embedding ? embedding->embed(y) : y);
    if (band && (pe.v < band->c1 || pe.v > band->c2)) continue;
    ++res.samples;
    if (pe.failed || pe.lie >= -a_const * pe.v) ++res.violations;
  }
  res.fraction = res.samples == 0 ? 0.0 : static_cast<double>(res.violations) / static_cast<double>(res.samples);
  std::tie(res.ci_low, res.ci_high) = wilson_interval(res.violations, res.samples);
  return res;
}

}  // namespace polyc::validator
