#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>

namespace polyc::cli {

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// creating parent directories as needed.
void write_atomic(const std::filesystem::path& path, const std::string& content);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Reads a JSON document (comments allowed). Throws ConfigError when the file
/// is missing or malformed.
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace polyc::cli
