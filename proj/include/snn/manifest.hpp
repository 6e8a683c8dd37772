#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace snn {

// Inventory of one run: what produced it and the checksummed artifacts it
// wrote. Artifacts flagged volatile (timing, benchmarks) are expected to
// differ between reruns; everything else must reproduce bit-identically for
// the same manifest inputs and thread count.
struct RunManifest {
  std::string command;
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;
  int threads = 1;
  bool deterministic = true;
  std::string created_utc;
  std::string config;  // canonical config text for exact reproduction

  struct Artifact {
    std::string path;  // relative to the manifest directory
    std::uint64_t bytes = 0;
    std::uint32_t crc32 = 0;
    bool volatile_timing = false;
  };
  std::vector<Artifact> artifacts;
};

std::string utc_timestamp();

// Checksums the file and appends it to the manifest inventory.
void add_artifact(RunManifest& m, const std::filesystem::path& dir,
                  const std::string& rel_path, bool volatile_timing = false);

void write_manifest(const RunManifest& m, const std::filesystem::path& dir);

}  // namespace snn
