#include "polyc/validator/eps_net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace polyc::validator {

EpsNet::EpsNet(Box box, std::vector<std::size_t> counts) : box_(std::move(box)), counts_(std::move(counts)) {
  if (box_.empty() || box_.size() != counts_.size()) throw DimensionError("EpsNet: box and counts differ");
  width_.resize(static_cast<Eigen::Index>(box_.size()));
  total_ = 1;
  for (std::size_t i = 0; i < box_.size(); ++i) {
    if (counts_[i] == 0) throw std::invalid_argument("EpsNet: zero cell count");
    if (!(box_[i].width() > 0.0)) throw std::invalid_argument("EpsNet: degenerate box");
    width_[static_cast<Eigen::Index>(i)] = box_[i].width() / static_cast<double>(counts_[i]);
    total_ *= counts_[i];
  }
}

double EpsNet::cell_volume() const { return width_.prod(); }

std::vector<std::size_t> EpsNet::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(dims());
  for (std::size_t d = dims(); d-- > 0;) {
    idx[d] = flat % counts_[d];
    flat /= counts_[d];
  }
  return idx;
}

std::size_t EpsNet::flatten(const std::vector<std::size_t>& idx) const {
  std::size_t flat = 0;
  for (std::size_t d = 0; d < dims(); ++d) flat = flat * counts_[d] + idx[d];
  return flat;
}

Vec EpsNet::center(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Vec c(static_cast<Eigen::Index>(dims()));
  for (std::size_t d = 0; d < dims(); ++d) {
    const auto k = static_cast<Eigen::Index>(d);
    c[k] = box_[d].lo + (static_cast<double>(idx[d]) + 0.5) * width_[k];
  }
  return c;
}

std::size_t EpsNet::locate(const Vec& x) const {
  require_dim(x.size(), static_cast<Eigen::Index>(dims()), "EpsNet::locate");
  std::vector<std::size_t> idx(dims());
  for (std::size_t d = 0; d < dims(); ++d) {
    const auto k = static_cast<Eigen::Index>(d);
    const double f = std::floor((x[k] - box_[d].lo) / width_[k]);
    idx[d] = static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(counts_[d] - 1)));
  }
  return flatten(idx);
}

namespace {

double total_cells_for(const Box& box, double side_scale, std::vector<std::size_t>& counts) {
  double total = 1.0;
  counts.resize(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    counts[i] = static_cast<std::size_t>(std::max(1.0, std::ceil(box[i].width() / side_scale - 1e-9)));
    total *= static_cast<double>(counts[i]);
  }
  return total;
}

}  // namespace

EpsNet budget_eps_net(const Box& box, std::size_t max_cells) {
  if (box.empty()) throw std::invalid_argument("budget_eps_net: empty box");
  const auto per_dim = static_cast<std::size_t>(
      std::floor(std::pow(static_cast<double>(max_cells), 1.0 / static_cast<double>(box.size())) + 1e-9));
  if (per_dim == 0) throw std::invalid_argument("budget_eps_net: budget below one cell");
  return {box, std::vector<std::size_t>(box.size(), per_dim)};
}

EpsNet build_eps_net(const Box& box, double lipschitz, double margin, std::size_t max_cells) {
  if (!(lipschitz > 0.0)) throw std::invalid_argument("build_eps_net: lipschitz must be positive");
  if (!(margin > 0.0)) throw std::invalid_argument("build_eps_net: margin must be positive");
  for (const auto& iv : box) {
    if (!(iv.width() > 0.0)) throw std::invalid_argument("build_eps_net: degenerate box");
  }
  // A cell with side s_i has diameter sqrt(sum s_i^2); equal sides s give
  // s * sqrt(n). Require lipschitz * diameter / 2 <= margin.
  const double diameter = 2.0 * margin / lipschitz;
  const double side = diameter / std::sqrt(static_cast<double>(box.size()));
  std::vector<std::size_t> counts;
  const double needed = total_cells_for(box, side, counts);
  if (needed > static_cast<double>(max_cells)) {
    const EpsNet feasible = budget_eps_net(box, max_cells);
    const double feasible_margin = lipschitz * feasible.cell_diameter() / 2.0;
    throw BudgetError("build_eps_net: margin " + std::to_string(margin) + " needs " + std::to_string(needed) +
                          " cells, budget is " + std::to_string(max_cells) + "; feasible margin is " +
                          std::to_string(feasible_margin),
                      feasible_margin);
  }
  return {box, counts};
}

}  // namespace polyc::validator
