#pragma once

// Run manifests written next to every CLI output.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace cstag {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
  std::vector<std::string> command_line;
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::uint64_t> seeds;
  /// path -> SHA-256 of the file contents
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::string> outputs;
  std::string started_at;
  std::string finished_at;

  void add_input(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// Current UTC time, ISO 8601 with second precision.
std::string utc_timestamp();

/// `<dir>/manifest.json` for a directory output, `<file>.manifest.json` otherwise.
std::filesystem::path manifest_path_for(const std::filesystem::path& output, bool is_directory);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace cstag
