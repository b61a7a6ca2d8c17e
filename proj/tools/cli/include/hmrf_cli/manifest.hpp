#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace hmrf::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// UTC timestamp, ISO 8601 with seconds.
std::string utc_now();

/// Run record written next to the primary output as `<output>.manifest.json`.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string started;
  std::string finished;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  /// Digests every input and output file and serializes.
  nlohmann::json to_json() const;
  void write(const std::string& path) const;
};

}  // namespace hmrf::cli
