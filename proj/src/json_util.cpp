#include "polyc/json_util.hpp"

#include <algorithm>

namespace polyc {

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(context + ": unknown key '" + key + "'");
    }
  }
}

nlohmann::json box_to_json(const Box& box) {
  auto j = nlohmann::json::array();
  for (const auto& iv : box) j.push_back({iv.lo, iv.hi});
  return j;
}

Box box_from_json(const nlohmann::json& j) {
  Box box;
  for (const auto& iv : j) {
    if (!iv.is_array() || iv.size() != 2) throw ConfigError("box interval must be [lo, hi]");
    Interval in{iv[0].get<double>(), iv[1].get<double>()};
    if (!(in.lo <= in.hi)) throw ConfigError("box interval has lo > hi");
    box.push_back(in);
  }
  return box;
}

nlohmann::json vec_to_json(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vec vec_from_json(const nlohmann::json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json mat_to_json(const Mat& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace polyc
