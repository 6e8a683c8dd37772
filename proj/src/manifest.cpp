#include "snn/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "snn/checksum.hpp"
#include "snn/error.hpp"

namespace snn {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void add_artifact(RunManifest& m, const fs::path& dir, const std::string& rel_path,
                  bool volatile_timing) {
  const fs::path full = dir / rel_path;
  std::ifstream f(full, std::ios::binary | std::ios::ate);
  if (!f) throw IoError("manifest: missing artifact " + full.string());
  const std::size_t len = static_cast<std::size_t>(f.tellg());
  f.seekg(0);
  std::vector<char> buf(len);
  if (len > 0) f.read(buf.data(), static_cast<std::streamsize>(len));
  if (!f) throw IoError("manifest: cannot read artifact " + full.string());

  RunManifest::Artifact a;
  a.path = rel_path;
  a.bytes = len;
  a.crc32 = crc32_bytes(buf.data(), buf.size());
  a.volatile_timing = volatile_timing;
  m.artifacts.push_back(a);
}

void write_manifest(const RunManifest& m, const fs::path& dir) {
  ordered_json j;
  j["tool"] = "spiketrain";
  j["version"] = m.version;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["deterministic"] = m.deterministic;
  j["created_utc"] = m.created_utc;
  j["config"] = ordered_json::parse(m.config);
  ordered_json arts = ordered_json::array();
  for (const auto& a : m.artifacts) {
    ordered_json e;
    e["path"] = a.path;
    e["bytes"] = a.bytes;
    e["crc32"] = a.crc32;
    e["volatile"] = a.volatile_timing;
    arts.push_back(e);
  }
  j["artifacts"] = arts;

  std::ofstream f(dir / "manifest.json", std::ios::trunc);
  if (!f) throw IoError("cannot write manifest in " + dir.string());
  f << j.dump(2) << "\n";
  if (!f) throw IoError("short write: manifest.json");
}

}  // namespace snn
