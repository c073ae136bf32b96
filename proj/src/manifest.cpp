#include "parity_forge/manifest.hpp"

#include <cstdlib>
#include <filesystem>

#include <omp.h>
#include <openssl/evp.h>

#include "parity_forge/core.hpp"
#include "parity_forge/error.hpp"

#ifndef PARITY_FORGE_VERSION
#define PARITY_FORGE_VERSION "0.0.0"
#endif

namespace parity_forge {

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr)) {
    throw Error(ErrorKind::io, "SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const char* env = std::getenv("PARITY_FORGE_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0 || v > 4096) {
    throw Error(ErrorKind::config, "PARITY_FORGE_THREADS must be a non-negative integer");
  }
  return static_cast<int>(v);
}

void apply_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

RunManifest::RunManifest(std::string command, const nlohmann::json& config, std::uint64_t seed)
    : command_(std::move(command)),
      config_digest_(sha256_hex(config.dump())),
      config_(config),
      seed_(seed),
      last_(std::chrono::steady_clock::now()) {}

void RunManifest::write(const std::string& dir, const std::string& name, std::string_view contents) {
  std::filesystem::path path = std::filesystem::path(dir) / name;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_file(path.string(), contents);
  files_.push_back({{"path", name}, {"bytes", contents.size()}, {"sha256", sha256_hex(contents)}});
}

void RunManifest::warn_all(const std::vector<std::string>& messages) {
  warnings_.insert(warnings_.end(), messages.begin(), messages.end());
}

void RunManifest::mark(const std::string& phase) {
  auto now = std::chrono::steady_clock::now();
  timings_[phase] = std::chrono::duration<double>(now - last_).count();
  last_ = now;
}

nlohmann::json RunManifest::to_json() const {
  return {{"command", command_},
          {"version", PARITY_FORGE_VERSION},
          {"config_sha256", config_digest_},
          {"config", config_},
          {"seed", seed_},
          {"threads", omp_get_max_threads()},
          {"timings_seconds", timings_},
          {"warnings", warnings_},
          {"files", files_}};
}

void RunManifest::save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  write_file((std::filesystem::path(dir) / "manifest.json").string(), to_json().dump(2) + "\n");
}

}  // namespace parity_forge
