#pragma once

// Run manifests: what was run, with which resolved parameters, and which files
// it wrote.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "eplab/error.hpp"

namespace eplab::cli {

inline constexpr const char* artifact_version = "0.1.0";

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct RunManifest {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  double wall_clock_seconds = 0.0;

  // Hash of the command and its resolved parameters; equal hashes mean equal
  // CSV outputs.
  std::string config_hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(command + "\n" + parameters.dump())));
    return buf;
  }

  nlohmann::json to_json() const {
    return {{"command", command},
            {"parameters", parameters},
            {"config_hash", config_hash()},
            {"outputs", outputs},
            {"warnings", warnings},
            {"wall_clock_seconds", wall_clock_seconds},
            {"version", artifact_version}};
  }

  void save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path);
    f << to_json().dump(2) << '\n';
  }
};

}  // namespace eplab::cli
