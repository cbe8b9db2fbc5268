#pragma once

#include "polyc/types.hpp"

#include "json.hpp"

#include <initializer_list>
#include <string>
#include <string_view>

namespace polyc {

/// Raised for malformed or out-of-range configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ConfigError naming the first key of `j` not in `allowed`.
void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                const std::string& context);

nlohmann::json box_to_json(const Box& box);
Box box_from_json(const nlohmann::json& j);

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);

nlohmann::json mat_to_json(const Mat& m);  // row-major nested arrays
Mat mat_from_json(const nlohmann::json& j);

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->template get<T>();
}

}  // namespace polyc
