#include "uerw/manifest.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "uerw/errors.hpp"

namespace uerw {

std::string config_fingerprint(const std::string& canonical_config) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : canonical_config) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["tool_version"] = kToolVersion;
  j["seed"] = manifest.seed;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  j["config_hash"] = manifest.config_hash;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace uerw
