#include "claa/manifest.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "claa/error.hpp"
#include "claa/util.hpp"

namespace claa {

using nlohmann::json;

std::filesystem::path data_dir() {
  const char* env = std::getenv("CLAA_DATA_DIR");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("claa-data");
}

json to_json(const RunManifest& m) {
  return {{"format", "claa-manifest/1"},
          {"command", m.command},
          {"config", m.config},
          {"seeds", m.seeds},
          {"inputs", m.inputs},
          {"outputs", m.outputs}};
}

std::string RunManifest::key() const {
  const json j{{"command", command}, {"config", config}, {"seeds", seeds}, {"inputs", inputs}};
  return hex64(fnv1a64(j.dump()));
}

std::string path_fingerprint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file or directory: " + path.string());
  if (!std::filesystem::is_directory(path)) return file_fingerprint(path);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(path)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string joined;
  for (const auto& f : files) {
    joined += std::filesystem::relative(f, path).generic_string() + ' ' + file_fingerprint(f) + '\n';
  }
  return text_fingerprint(joined);
}

std::filesystem::path write_manifest(const RunManifest& m) {
  const auto path = data_dir() / "manifests" / (m.command + "-" + m.key() + ".json");
  write_file(path, to_json(m).dump(2) + "\n");
  return path;
}

}  // namespace claa
