#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace igsim {

using Json = nlohmann::json;

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Parses a JSON file; parse failures become ConfigError naming the path.
Json load_json(const std::filesystem::path& path);

/// Field accessor that reports the missing/mistyped key by name.
template <typename T>
T require(const Json& j, const char* key, const std::string& where);

}  // namespace igsim
