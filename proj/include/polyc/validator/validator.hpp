#pragma once

#include "polyc/envs/env.hpp"
#include "polyc/validator/eps_net.hpp"

#include "json.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace polyc::validator {

/// Deterministic closed-loop map x -> x' over one step of length dt. A
/// throwing step marks the evaluated point as violating.
struct ClosedLoop {
  std::function<Vec(const Vec&)> step;
  double dt = 0.0;
};

/// Closed loop of `env` under a state-feedback action, stepped from a fresh
/// episode clock.
ClosedLoop closed_loop(const envs::Env& env, std::function<Vec(const Vec&)> action);

/// Restriction of the state space to a coordinate plane (or any subset of
/// coordinates): free coordinates vary, the rest are pinned to `anchor`.
struct Embedding {
  std::vector<int> free_dims;
  Vec anchor;

  Vec embed(const Vec& y) const;
  static Embedding identity(int n);
  bool is_identity() const;
};

/// V and its sampled Lie derivative at one point.
struct PointEval {
  double v = 0.0;
  double lie = 0.0;
  bool failed = false;
};

PointEval evaluate_point(const ScalarField& v, const ClosedLoop& loop, const Vec& x);

enum class CellLabel : std::uint8_t { satisfying, violating, outside_band };

struct Band {
  double c1 = 0.0;
  double c2 = 0.0;
};

/// V / Lie values at every cell center, independent of band and a.
struct CellField {
  EpsNet net;
  Embedding embedding;
  std::vector<double> v;
  std::vector<double> lie;
  std::vector<bool> failed;
  double v_origin = 0.0;
};

CellField evaluate_cells(const ScalarField& v, const ClosedLoop& loop, const EpsNet& net, const Embedding& embedding,
                         const Vec& origin);

struct CellClassification {
  std::vector<CellLabel> labels;
  Band band;
  double a_const = 0.0;
  bool positivity_ok = false;
  std::size_t in_band = 0;
  std::size_t violating = 0;
  double min_v_in_band = 0.0;
  double max_lie_in_band = 0.0;
};

/// Positivity check used by classification: V >= -tol at every center and
/// V(origin) <= 1e-3 * max V.
bool positivity_check(const CellField& field, double tol = 1e-6);

/// Labels cells whose V lies in [c1, c2]: violating iff lie >= -a V (or the
/// step failed), satisfying otherwise. Cells outside the band are outside_band.
CellClassification classify(const CellField& field, double a_const, Band band);

/// Evaluates the field and classifies in one call.
CellClassification classify_cells(const ScalarField& v, const ClosedLoop& loop, const EpsNet& net, double a_const,
                                  Band band, const Vec& origin, const Embedding& embedding);

struct Component {
  std::size_t cells = 0;
  double volume = 0.0;
  Box bbox;  // union of member cell boxes
};

/// Face-adjacent (2n-neighbour) connected components of the violating cells.
std::vector<Component> connected_components(const EpsNet& net, const std::vector<CellLabel>& labels);

/// Heuristic Lipschitz constant of x -> sampled Lie derivative: the largest
/// |lie(x + d) - lie(x)| / |d| over `samples` random pairs with |d| = 1e-3,
/// times a safety factor of 2. Not a sound bound.
double estimate_lipschitz(const ScalarField& v, const ClosedLoop& loop, const Box& box, std::size_t samples, Rng& rng,
                          const Embedding* embedding = nullptr);

enum class CertifyMode { full_grid, slice, monte_carlo };

std::string to_string(CertifyMode m);
CertifyMode certify_mode_from_string(const std::string& s);

struct BandSearchConfig {
  int levels = 20;
  double low_percentile = 5.0;
  double high_percentile = 95.0;
};

struct CertificationReport {
  bool certified = false;
  bool certifying = true;  // false for slice / monte-carlo: never a proof
  CertifyMode mode = CertifyMode::full_grid;
  Band band;
  double a_const = 0.0;
  double epsilon_volume = 0.0;
  std::vector<Component> components;
  double violation_fraction = 0.0;
  bool positivity_ok = false;
  double min_v_in_band = 0.0;
  double max_lie_in_band = 0.0;
  std::size_t cells_in_band = 0;
  std::size_t violating_cells = 0;
  // grid metadata
  Box box;
  std::vector<std::size_t> counts;
  std::vector<int> free_dims;
  Vec anchor;
  double cell_volume = 0.0;
  double lipschitz_estimate = 0.0;
  double achieved_margin = 0.0;
  double v_origin = 0.0;
  std::size_t bands_tried = 0;
  std::string note;

  nlohmann::json to_json() const;
};

/// Checks, from a serialized report alone, that certified=true implies the
/// three premise checks recorded in it.
bool report_consistent(const nlohmann::json& report);

/// Per-band decision on an evaluated field.
CertificationReport assess_band(const CellField& field, double a_const, double epsilon_volume, Band band);

/**
 * Sweeps candidate bands between the low/high percentiles of V over the grid
 * (log-spaced levels; c2 from the top down, c1 from the bottom up) and
 * returns the widest band satisfying all premise checks, or the
 * least-violating band when none passes.
 */
CertificationReport certify_band(const CellField& field, double a_const, double epsilon_volume,
                                 const BandSearchConfig& cfg = {});

struct MonteCarloResult {
  std::size_t samples = 0;     // points considered (inside the band when one is given)
  std::size_t violations = 0;
  double fraction = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t drawn = 0;
};

/// Wilson score interval at 95%.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

/**
 * Uniform samples in `box`; fraction with lie >= -a V. With a band, only
 * samples whose V lies in it count. Never a certificate.
 */
MonteCarloResult monte_carlo_validate(const ScalarField& v, const ClosedLoop& loop, const Box& box, double a_const,
                                      std::size_t n_samples, Rng& rng, std::optional<Band> band = std::nullopt,
                                      const Embedding* embedding = nullptr);

}  // namespace polyc::validator
