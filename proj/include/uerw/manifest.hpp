#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace uerw {

inline constexpr const char* kToolVersion = "0.1.0";

// Reproducibility record for one CLI run: no wall-clock fields so re-runs
// with identical inputs are byte-identical.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// FNV-1a 64 over a canonical string rendering of the effective config.
std::string config_fingerprint(const std::string& canonical_config);

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace uerw
