#include "polyc/types.hpp"

#include <algorithm>

namespace polyc {

bool box_contains(const Box& box, const Vec& x) {
  if (static_cast<Eigen::Index>(box.size()) != x.size()) return false;
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (!box[i].contains(x[static_cast<Eigen::Index>(i)])) return false;
  }
  return true;
}

Vec box_sample(const Box& box, Rng& rng) {
  Vec x(static_cast<Eigen::Index>(box.size()));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < box.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = box[i].lo + unit(rng) * box[i].width();
  }
  return x;
}

Vec box_center(const Box& box) {
  Vec c(static_cast<Eigen::Index>(box.size()));
  for (std::size_t i = 0; i < box.size(); ++i) c[static_cast<Eigen::Index>(i)] = box[i].center();
  return c;
}

Vec box_clamp(const Box& box, const Vec& x) {
  require_dim(x.size(), static_cast<Eigen::Index>(box.size()), "box_clamp");
  Vec y = x;
  for (std::size_t i = 0; i < box.size(); ++i) {
    auto k = static_cast<Eigen::Index>(i);
    y[k] = std::clamp(y[k], box[i].lo, box[i].hi);
  }
  return y;
}

}  // namespace polyc
