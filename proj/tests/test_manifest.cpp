#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "parity_forge/core.hpp"
#include "parity_forge/error.hpp"
#include "parity_forge/manifest.hpp"

using namespace parity_forge;

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Threads, FlagThenEnvironment) {
  ::setenv("PARITY_FORGE_THREADS", "3", 1);
  EXPECT_EQ(resolve_threads(2), 2);
  EXPECT_EQ(resolve_threads(0), 3);
  ::setenv("PARITY_FORGE_THREADS", "many", 1);
  EXPECT_THROW(resolve_threads(0), Error);
  ::unsetenv("PARITY_FORGE_THREADS");
  EXPECT_EQ(resolve_threads(0), 0);
}

TEST(RunManifest, ListsFilesWithDigests) {
  auto dir = (std::filesystem::temp_directory_path() / "pf_manifest_test").string();
  std::filesystem::remove_all(dir);
  RunManifest m("transform", {{"seed", 4}}, 4);
  m.write(dir, "a.csv", "x\n1\n");
  m.write(dir, "sub/b.csv", "abc");
  m.warn("careful");
  m.mark("write");
  m.save(dir);
  auto j = nlohmann::json::parse(read_file(dir + "/manifest.json"));
  ASSERT_EQ(j["files"].size(), 2u);
  EXPECT_EQ(j["files"][1]["path"], "sub/b.csv");
  EXPECT_EQ(j["files"][1]["sha256"], sha256_hex("abc"));
  EXPECT_EQ(j["files"][0]["bytes"], 4);
  EXPECT_EQ(j["seed"], 4);
  EXPECT_EQ(j["config_sha256"], sha256_hex(nlohmann::json{{"seed", 4}}.dump()));
  EXPECT_EQ(j["warnings"][0], "careful");
  EXPECT_EQ(read_file(dir + "/sub/b.csv"), "abc");
  std::filesystem::remove_all(dir);
}
