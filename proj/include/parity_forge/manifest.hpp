#pragma once

// Run manifest: config digest, seed, timings, warnings and every emitted file
// with its SHA-256 digest. Also the thread-count policy shared by the tools.

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace parity_forge {

std::string sha256_hex(std::string_view data);

// Explicit count when positive, else PARITY_FORGE_THREADS, else 0 (runtime
// default). Invalid environment values are a config error.
int resolve_threads(int requested);
// Applies a resolved count to the OpenMP runtime; 0 leaves it unchanged.
void apply_threads(int threads);

class RunManifest {
 public:
  RunManifest(std::string command, const nlohmann::json& config, std::uint64_t seed);

  // Writes `contents` to dir/name and records its digest under `name`.
  void write(const std::string& dir, const std::string& name, std::string_view contents);
  void warn(std::string message) { warnings_.push_back(std::move(message)); }
  void warn_all(const std::vector<std::string>& messages);
  // Records the wall time since the previous mark (or construction).
  void mark(const std::string& phase);

  nlohmann::json to_json() const;
  // Writes manifest.json into dir.
  void save(const std::string& dir) const;

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  std::string command_;
  std::string config_digest_;
  nlohmann::json config_;
  std::uint64_t seed_;
  std::vector<std::string> warnings_;
  nlohmann::json files_ = nlohmann::json::array();
  nlohmann::json timings_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point last_;
};

}  // namespace parity_forge
