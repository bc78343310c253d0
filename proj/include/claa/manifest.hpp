#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

namespace claa {

// CLAA_DATA_DIR, or ./claa-data when unset.
std::filesystem::path data_dir();

// Record of one CLI run: everything that determines its outputs, plus the
// outputs' fingerprints. No timestamps, so equal runs give equal manifests.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  // name -> fingerprint
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;

  // Fingerprint of command, config, seeds and inputs.
  std::string key() const;
};

nlohmann::json to_json(const RunManifest& m);

// Fingerprint of a file, or of every file below a directory (sorted paths).
std::string path_fingerprint(const std::filesystem::path& path);

// Writes <data_dir>/manifests/<command>-<key>.json and returns its path.
std::filesystem::path write_manifest(const RunManifest& m);

}  // namespace claa
