#pragma once

#include "polyc/validator/validator.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace polyc::validator {

using Point2 = std::array<double, 2>;
using Segment2 = std::array<Point2, 2>;

struct Contour {
  double level = 0.0;
  std::vector<Segment2> segments;
};

/// Cell map of one candidate on a 2-D plane.
struct Landscape {
  std::string title;
  CellField field;
  double a_const = 0.0;
  std::optional<Band> band;       // certified band, if any
  Band labelled_band;             // band used for the in-band labels
  std::vector<CellLabel> labels;  // relative to labelled_band
  std::vector<bool> condition;    // lie < -a V, at every cell regardless of band
  std::vector<Contour> contours;  // 10 V levels
  std::vector<Contour> band_boundary;

  std::size_t violating_in_band() const;
  nlohmann::json to_json() const;
};

/// Level-set segments of a cell-centred grid by marching squares.
std::vector<Segment2> marching_squares(const EpsNet& net, const std::vector<double>& values, double level);

/**
 * Builds the map for a 2-D field. `report` supplies the band: the blue
 * boundary is drawn only when it is certified.
 */
Landscape landscape_map(const CellField& field, double a_const, const CertificationReport& report,
                        std::string title, int n_levels = 10);

/// Side-by-side panels sharing a legend: grey satisfying, red violating
/// (faded outside the band), black V contours, blue certified band edges.
std::string render_svg(const std::vector<Landscape>& panels);

}  // namespace polyc::validator
