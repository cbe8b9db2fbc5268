#pragma once

#include "polyc/types.hpp"

#include <cstddef>
#include <vector>

namespace polyc::validator {

/// Uniform partition of a box into cells; cells are indexed in row-major
/// order with the last dimension varying fastest.
class EpsNet {
 public:
  EpsNet() = default;
  EpsNet(Box box, std::vector<std::size_t> counts);

  std::size_t dims() const { return box_.size(); }
  const Box& box() const { return box_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  const Vec& cell_width() const { return width_; }
  std::size_t total_cells() const { return total_; }
  double cell_volume() const;
  /// Full diagonal of one cell.
  double cell_diameter() const { return width_.norm(); }

  Vec center(std::size_t flat) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::vector<std::size_t>& idx) const;
  /// Cell containing x (clamped to the box).
  std::size_t locate(const Vec& x) const;

 private:
  Box box_;
  std::vector<std::size_t> counts_;
  Vec width_;
  std::size_t total_ = 0;
};

/// Raised when the requested resolution does not fit the cell budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, double feasible_margin)
      : std::runtime_error(what), feasible_margin_(feasible_margin) {}
  double feasible_margin() const { return feasible_margin_; }

 private:
  double feasible_margin_;
};

/**
 * Grid fine enough that lipschitz * diameter / 2 <= margin, i.e. the Lie
 * derivative anywhere in a cell is within `margin` of its value at the
 * center (to the accuracy of the Lipschitz estimate). Throws BudgetError,
 * quoting the finest margin that fits, if more than `max_cells` are needed.
 */
EpsNet build_eps_net(const Box& box, double lipschitz, double margin, std::size_t max_cells);

/// Finest uniform-count grid within the budget.
EpsNet budget_eps_net(const Box& box, std::size_t max_cells);

}  // namespace polyc::validator
