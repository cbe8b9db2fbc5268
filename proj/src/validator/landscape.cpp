#include "polyc/validator/landscape.hpp"

#include "polyc/json_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace polyc::validator {

std::size_t Landscape::violating_in_band() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), CellLabel::violating));
}

namespace {

const char* label_name(CellLabel l) {
  switch (l) {
    case CellLabel::satisfying:
      return "satisfying";
    case CellLabel::violating:
      return "violating";
    case CellLabel::outside_band:
      return "outside-band";
  }
  return "unknown";
}

nlohmann::json contours_json(const std::vector<Contour>& cs) {
  auto out = nlohmann::json::array();
  for (const auto& c : cs) {
    auto segs = nlohmann::json::array();
    for (const auto& s : c.segments) segs.push_back({{s[0][0], s[0][1]}, {s[1][0], s[1][1]}});
    out.push_back({{"level", c.level}, {"segments", segs}});
  }
  return out;
}

nlohmann::json num(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

nlohmann::json Landscape::to_json() const {
  auto cells = nlohmann::json::array();
  for (std::size_t c = 0; c < labels.size(); ++c) {
    const Vec ctr = field.net.center(c);
    cells.push_back({{"x", ctr[0]},
                     {"y", ctr[1]},
                     {"V", num(field.v[c])},
                     {"lie", num(field.lie[c])},
                     {"label", label_name(labels[c])},
                     {"decreasing", static_cast<bool>(condition[c])}});
  }
  nlohmann::json band_json = nullptr;
  if (band) band_json = {band->c1, band->c2};
  return {{"title", title},
          {"a_const", a_const},
          {"plane", {{"free_dims", field.embedding.free_dims}, {"anchor", vec_to_json(field.embedding.anchor)}}},
          {"box", box_to_json(field.net.box())},
          {"counts", field.net.counts()},
          {"certified_band", band_json},
          {"labelled_band", {labelled_band.c1, labelled_band.c2}},
          {"violating_in_band", violating_in_band()},
          {"cells", cells},
          {"contours", contours_json(contours)},
          {"band_boundary", contours_json(band_boundary)}};
}

std::vector<Segment2> marching_squares(const EpsNet& net, const std::vector<double>& values, double level) {
  if (net.dims() != 2) throw DimensionError("marching_squares: plane grids only");
  if (values.size() != net.total_cells()) throw DimensionError("marching_squares: value count mismatch");
  const auto nx = net.counts()[0];
  const auto ny = net.counts()[1];
  auto at = [&](std::size_t i, std::size_t j) { return values[i * ny + j]; };
  auto pos = [&](std::size_t i, std::size_t j) {
    const Vec c = net.center(i * ny + j);
    return Point2{c[0], c[1]};
  };
  auto lerp = [&](const Point2& p, double vp, const Point2& q, double vq) {
    const double t = (vq == vp) ? 0.5 : (level - vp) / (vq - vp);
    return Point2{p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])};
  };
  std::vector<Segment2> segs;
  if (nx < 2 || ny < 2) return segs;
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      // corners counter-clockwise: (i,j) (i+1,j) (i+1,j+1) (i,j+1)
      const std::array<Point2, 4> p{pos(i, j), pos(i + 1, j), pos(i + 1, j + 1), pos(i, j + 1)};
      const std::array<double, 4> v{at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) continue;
      int code = 0;
      for (int k = 0; k < 4; ++k) {
        if (v[static_cast<std::size_t>(k)] >= level) code |= 1 << k;
      }
      if (code == 0 || code == 15) continue;
      auto edge = [&](int e) {
        const auto a = static_cast<std::size_t>(e);
        const auto b = static_cast<std::size_t>((e + 1) % 4);
        return lerp(p[a], v[a], p[b], v[b]);
      };
      // edges: 0 = (c0,c1), 1 = (c1,c2), 2 = (c2,c3), 3 = (c3,c0)
      std::vector<int> crossed;
      for (int e = 0; e < 4; ++e) {
        const bool a = (code >> e) & 1;
        const bool b = (code >> ((e + 1) % 4)) & 1;
        if (a != b) crossed.push_back(e);
      }
      if (crossed.size() == 2) {
        segs.push_back({edge(crossed[0]), edge(crossed[1])});
      } else {
        // Saddle: resolve with the mean of the four corners.
        const double mid = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        const bool c0_high = code & 1;
        if ((mid >= level) == c0_high) {
          segs.push_back({edge(0), edge(1)});
          segs.push_back({edge(2), edge(3)});
        } else {
          segs.push_back({edge(3), edge(0)});
          segs.push_back({edge(1), edge(2)});
        }
      }
    }
  }
  return segs;
}

Landscape landscape_map(const CellField& field, double a_const, const CertificationReport& report, std::string title,
                        int n_levels) {
  if (field.net.dims() != 2) throw DimensionError("landscape_map: needs a 2-D plane");
  Landscape map;
  map.title = std::move(title);
  map.field = field;
  map.a_const = a_const;
  map.labelled_band = report.band;
  if (report.certified) map.band = report.band;
  map.labels = classify(field, a_const, report.band).labels;
  map.condition.resize(field.v.size());
  for (std::size_t c = 0; c < field.v.size(); ++c) {
    map.condition[c] = !field.failed[c] && field.lie[c] < -a_const * field.v[c];
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : field.v) {
    if (!std::isfinite(x)) continue;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (lo < hi) {
    for (int k = 1; k <= n_levels; ++k) {
      const double level = lo + (hi - lo) * k / (n_levels + 1);
      map.contours.push_back({level, marching_squares(field.net, field.v, level)});
    }
  }
  if (map.band) {
    for (double level : {map.band->c1, map.band->c2}) {
      map.band_boundary.push_back({level, marching_squares(field.net, field.v, level)});
    }
  }
  return map;
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

std::string xml_escape(const std::string& in) {
  std::string out;
  for (char c : in) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::vector<Landscape>& panels) {
  constexpr double kPlot = 360.0;
  constexpr double kPad = 40.0;
  constexpr double kTitle = 24.0;
  constexpr double kLegend = 30.0;
  const double width = static_cast<double>(panels.size()) * (kPlot + kPad) + kPad;
  const double height = kTitle + kPlot + kPad + kLegend;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& map = panels[p];
    const auto& box = map.field.net.box();
    const double x0 = kPad + static_cast<double>(p) * (kPlot + kPad);
    const double y0 = kTitle;
    const double sx = kPlot / box[0].width();
    const double sy = kPlot / box[1].width();
    auto px = [&](double x) { return x0 + (x - box[0].lo) * sx; };
    auto py = [&](double y) { return y0 + kPlot - (y - box[1].lo) * sy; };
    svg << "<text x=\"" << fmt(x0) << "\" y=\"16\">" << xml_escape(map.title) << "</text>\n";
    const Vec w = map.field.net.cell_width();
    const double cw = w[0] * sx;
    const double ch = w[1] * sy;
    for (std::size_t c = 0; c < map.labels.size(); ++c) {
      const Vec ctr = map.field.net.center(c);
      const bool in_band = map.labels[c] != CellLabel::outside_band;
      const bool bad = in_band ? map.labels[c] == CellLabel::violating : !map.condition[c];
      svg << "<rect x=\"" << fmt(px(ctr[0]) - 0.5 * cw) << "\" y=\"" << fmt(py(ctr[1]) - 0.5 * ch) << "\" width=\""
          << fmt(cw) << "\" height=\"" << fmt(ch) << "\" fill=\"" << (bad ? "#d62728" : "#a0a0a0") << "\""
          << (in_band ? "" : " fill-opacity=\"0.35\"") << "/>\n";
    }
    auto draw = [&](const std::vector<Contour>& cs, const char* colour, double stroke) {
      for (const auto& c : cs) {
        for (const auto& s : c.segments) {
          svg << "<line x1=\"" << fmt(px(s[0][0])) << "\" y1=\"" << fmt(py(s[0][1])) << "\" x2=\""
              << fmt(px(s[1][0])) << "\" y2=\"" << fmt(py(s[1][1])) << "\" stroke=\"" << colour
              << "\" stroke-width=\"" << fmt(stroke) << "\"/>\n";
        }
      }
    };
    draw(map.contours, "black", 0.8);
    draw(map.band_boundary, "#1f3fbf", 2.0);
    svg << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(kPlot) << "\" height=\""
        << fmt(kPlot) << "\" fill=\"none\" stroke=\"black\"/>\n";
    const auto& dims = map.field.embedding.free_dims;
    svg << "<text x=\"" << fmt(x0 + kPlot / 2) << "\" y=\"" << fmt(y0 + kPlot + 16) << "\" text-anchor=\"middle\">s"
        << dims[0] << " [" << fmt(box[0].lo) << ", " << fmt(box[0].hi) << "]</text>\n";
    svg << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(y0 + kPlot / 2) << "\" text-anchor=\"end\">s" << dims[1]
        << "</text>\n";
  }
  const double ly = kTitle + kPlot + kPad;
  const std::array<std::pair<const char*, const char*>, 4> legend{{{"#a0a0a0", "lie &lt; -aV (satisfying)"},
                                                                   {"#d62728", "lie &gt;= -aV (violating)"},
                                                                   {"black", "V level sets"},
                                                                   {"#1f3fbf", "certified band boundary"}}};
  for (std::size_t i = 0; i < legend.size(); ++i) {
    const double lx = kPad + static_cast<double>(i) * 190.0;
    svg << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly) << "\" width=\"12\" height=\"12\" fill=\"" << legend[i].first
        << "\"/>\n";
    svg << "<text x=\"" << fmt(lx + 16) << "\" y=\"" << fmt(ly + 11) << "\">" << legend[i].second << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace polyc::validator
