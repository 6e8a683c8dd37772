#include "snn/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "snn/error.hpp"
#include "snn/parallel.hpp"

namespace snn {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void AlSpec::validate() const {
  if (length < 1) throw ConfigError("task: length must be >= 1, got " + std::to_string(length));
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw DistributionError("task: action probabilities must be >= 0");
    total += p;
  }
  if (total < 1.0 - 1e-9 || total > 1.0 + 1e-9) {
    throw DistributionError("task: action probabilities sum to " + std::to_string(total));
  }
  if (train_count < 0 || test_count < 0) {
    throw ConfigError("task: sample counts must be >= 0");
  }
}

std::string AlSpec::fingerprint(const char* split, int count) const {
  std::string canon = "al;len=" + std::to_string(length);
  canon += ";probs=";
  for (double p : probs) canon += std::to_string(p) + ",";
  canon += ";seed=" + std::to_string(seed);
  canon += ";split=" + std::string(split);
  canon += ";count=" + std::to_string(count);
  return hex64(fnv1a64(canon));
}

void al_apply(AlPose& pose, AlAction a) {
  switch (a) {
    case AlAction::TurnLeft: {  // 90 degrees counterclockwise, no translation
      const int dx = pose.dx;
      pose.dx = -pose.dy;
      pose.dy = dx;
      break;
    }
    case AlAction::TurnRight: {  // 90 degrees clockwise, no translation
      const int dx = pose.dx;
      pose.dx = pose.dy;
      pose.dy = -dx;
      break;
    }
    case AlAction::GoStraight:
      pose.x += pose.dx;
      pose.y += pose.dy;
      break;
    case AlAction::Stop:
      break;
  }
}

AlPose al_rollout(const AlAction* actions, int n) {
  AlPose pose;
  for (int i = 0; i < n; ++i) al_apply(pose, actions[i]);
  return pose;
}

std::uint32_t al_label_from_final_x(long long x) { return x <= 0 ? 0u : 1u; }

AlSample generate_al_sample(RngStream& rng, const AlSpec& spec) {
  spec.validate();
  AlSample s;
  s.actions.resize(spec.length);
  s.onehot.assign(static_cast<std::size_t>(spec.length) * kAlChannels, 0.0f);
  for (int t = 0; t < spec.length; ++t) {
    const int a = sample_categorical(rng, std::span<const double>(spec.probs));
    s.actions[t] = static_cast<AlAction>(a);
    s.onehot[static_cast<std::size_t>(t) * kAlChannels + a] = 1.0f;
  }
  const AlPose pose = al_rollout(s.actions.data(), spec.length);
  s.label = al_label_from_final_x(pose.x);
  return s;
}

Dataset generate_al_split(const AlSpec& spec, bool test_split) {
  spec.validate();
  const int count = test_split ? spec.test_count : spec.train_count;
  if (count < 1) throw ConfigError("task: split must contain at least one sample");
  const std::uint64_t stream_base =
      test_split ? streams::kSampleTrain + static_cast<std::uint64_t>(spec.train_count)
                 : streams::kSampleTrain;

  Dataset ds;
  ds.meta.n = static_cast<std::uint32_t>(count);
  ds.meta.steps = static_cast<std::uint32_t>(spec.length);
  ds.meta.channels = kAlChannels;
  ds.meta.classes = kAlClasses;
  ds.meta.encoding = "onehot-action-4";
  ds.meta.fingerprint = spec.fingerprint(test_split ? "test" : "train", count);
  ds.data.resize(static_cast<std::size_t>(count) * spec.length * kAlChannels);
  ds.labels.resize(count);

  std::array<std::int64_t, kAlChannels> action_counts{};
  std::array<std::int64_t, kAlClasses> class_counts{};
#pragma omp parallel
  {
    std::array<std::int64_t, kAlChannels> my_actions{};
    std::array<std::int64_t, kAlClasses> my_classes{};
    const Shard sh = shard_of(count, thread_id(), team_size());
    for (int i = sh.begin; i < sh.end; ++i) {
      RngStream rng(spec.seed, stream_base + static_cast<std::uint64_t>(i));
      const AlSample s = generate_al_sample(rng, spec);
      std::copy(s.onehot.begin(), s.onehot.end(),
                ds.data.begin() + static_cast<std::size_t>(i) * spec.length * kAlChannels);
      ds.labels[i] = s.label;
      for (AlAction a : s.actions) ++my_actions[static_cast<int>(a)];
      ++my_classes[s.label];
    }
#pragma omp critical
    {
      for (int a = 0; a < kAlChannels; ++a) action_counts[a] += my_actions[a];
      for (int c = 0; c < kAlClasses; ++c) class_counts[c] += my_classes[c];
    }
  }

  const double denom_a = static_cast<double>(count) * spec.length;
  for (int a = 0; a < kAlChannels; ++a) {
    ds.meta.action_freq.push_back(action_counts[a] / denom_a);
  }
  for (int c = 0; c < kAlClasses; ++c) {
    ds.meta.class_freq.push_back(class_counts[c] / static_cast<double>(count));
  }
  ds.meta.crc_data = crc32_bytes(ds.data.data(), ds.data.size() * sizeof(float));
  ds.meta.crc_labels = crc32_bytes(ds.labels.data(), ds.labels.size() * sizeof(std::uint32_t));
  return ds;
}

namespace {

void write_file(const fs::path& path, const void* data, std::size_t len) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
  if (!f) throw IoError("short write: " + path.string());
}

std::vector<char> read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw IoError("cannot open for reading: " + path.string());
  const std::streamsize len = f.tellg();
  f.seekg(0);
  std::vector<char> buf(static_cast<std::size_t>(len));
  if (len > 0) f.read(buf.data(), len);
  if (!f) throw IoError("short read: " + path.string());
  return buf;
}

template <class T>
T require_field(const ordered_json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) {
    throw CorruptDatasetError("meta.json missing field '" + std::string(key) + "' in " +
                              where.string());
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptDatasetError("meta.json field '" + std::string(key) + "' has wrong type in " +
                              where.string() + ": " + e.what());
  }
}

}  // namespace

void save_dataset(const Dataset& ds, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

  write_file(dir / "data.f32", ds.data.data(), ds.data.size() * sizeof(float));
  write_file(dir / "labels.u32", ds.labels.data(), ds.labels.size() * sizeof(std::uint32_t));

  ordered_json j;
  j["n"] = ds.meta.n;
  j["steps"] = ds.meta.steps;
  j["channels"] = ds.meta.channels;
  j["classes"] = ds.meta.classes;
  j["encoding"] = ds.meta.encoding;
  j["fingerprint"] = ds.meta.fingerprint;
  j["class_freq"] = ds.meta.class_freq;
  j["action_freq"] = ds.meta.action_freq;
  j["crc_data"] = ds.meta.crc_data;
  j["crc_labels"] = ds.meta.crc_labels;
  const std::string text = j.dump(2) + "\n";
  write_file(dir / "meta.json", text.data(), text.size());
}

Dataset load_dataset(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  if (!fs::exists(meta_path)) {
    throw CorruptDatasetError("no dataset at " + dir.string() + " (meta.json missing)");
  }
  ordered_json j;
  try {
    const auto text = read_file(meta_path);
    j = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw CorruptDatasetError("unparseable meta.json in " + dir.string() + ": " + e.what());
  }

  Dataset ds;
  ds.meta.n = require_field<std::uint32_t>(j, "n", dir);
  ds.meta.steps = require_field<std::uint32_t>(j, "steps", dir);
  ds.meta.channels = require_field<std::uint32_t>(j, "channels", dir);
  ds.meta.classes = require_field<std::uint32_t>(j, "classes", dir);
  ds.meta.encoding = require_field<std::string>(j, "encoding", dir);
  ds.meta.fingerprint = require_field<std::string>(j, "fingerprint", dir);
  ds.meta.class_freq = require_field<std::vector<double>>(j, "class_freq", dir);
  ds.meta.action_freq = require_field<std::vector<double>>(j, "action_freq", dir);
  ds.meta.crc_data = require_field<std::uint32_t>(j, "crc_data", dir);
  ds.meta.crc_labels = require_field<std::uint32_t>(j, "crc_labels", dir);

  if (ds.meta.n == 0) throw CorruptDatasetError("dataset is empty in " + dir.string());
  if (ds.meta.steps == 0 || ds.meta.channels == 0 || ds.meta.classes == 0) {
    throw CorruptDatasetError("degenerate shape in " + dir.string());
  }

  const auto data_bytes = read_file(dir / "data.f32");
  const auto label_bytes = read_file(dir / "labels.u32");
  const std::size_t want_data =
      static_cast<std::size_t>(ds.meta.n) * ds.meta.steps * ds.meta.channels * sizeof(float);
  if (data_bytes.size() != want_data) {
    throw CorruptDatasetError("data.f32 in " + dir.string() + " holds " +
                              std::to_string(data_bytes.size()) + " bytes, expected " +
                              std::to_string(want_data));
  }
  const std::size_t want_labels = static_cast<std::size_t>(ds.meta.n) * sizeof(std::uint32_t);
  if (label_bytes.size() != want_labels) {
    throw CorruptDatasetError("labels.u32 in " + dir.string() + " holds " +
                              std::to_string(label_bytes.size()) + " bytes, expected " +
                              std::to_string(want_labels));
  }
  if (crc32_bytes(data_bytes.data(), data_bytes.size()) != ds.meta.crc_data) {
    throw CorruptDatasetError("data.f32 checksum mismatch in " + dir.string());
  }
  if (crc32_bytes(label_bytes.data(), label_bytes.size()) != ds.meta.crc_labels) {
    throw CorruptDatasetError("labels.u32 checksum mismatch in " + dir.string());
  }

  ds.data.resize(data_bytes.size() / sizeof(float));
  std::memcpy(ds.data.data(), data_bytes.data(), data_bytes.size());
  ds.labels.resize(ds.meta.n);
  std::memcpy(ds.labels.data(), label_bytes.data(), label_bytes.size());

  for (std::uint32_t i = 0; i < ds.meta.n; ++i) {
    if (ds.labels[i] >= ds.meta.classes) {
      throw CorruptDatasetError("label " + std::to_string(ds.labels[i]) + " at row " +
                                std::to_string(i) + " out of range in " + dir.string());
    }
  }
  for (float x : ds.data) {
    if (!std::isfinite(x)) throw CorruptDatasetError("non-finite input in " + dir.string());
  }
  return ds;
}

void generate_al_dataset(const AlSpec& spec, const fs::path& out_dir) {
  save_dataset(generate_al_split(spec, false), out_dir / "train");
  save_dataset(generate_al_split(spec, true), out_dir / "test");
}

std::vector<std::vector<std::uint32_t>> batch_partition(std::uint32_t n, int batch_size,
                                                        RngStream* shuffle_rng) {
  if (n == 0) throw DataError("batch_partition: empty dataset");
  if (batch_size < 1) throw ConfigError("batch_partition: batch size must be >= 1");
  std::vector<std::uint32_t> order(n);
  for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
  if (shuffle_rng) shuffle(*shuffle_rng, order);
  std::vector<std::vector<std::uint32_t>> out;
  for (std::uint32_t at = 0; at < n; at += batch_size) {
    const std::uint32_t end = std::min<std::uint32_t>(n, at + batch_size);
    out.emplace_back(order.begin() + at, order.begin() + end);
  }
  return out;
}

Batch gather_batch(const Dataset& ds, const std::vector<std::uint32_t>& idx) {
  if (idx.empty()) throw DataError("gather_batch: empty index set");
  Batch b;
  b.indices = idx;
  b.inputs = Seq32(static_cast<int>(idx.size()), ds.steps(), ds.channels());
  b.labels.resize(idx.size());
  const std::size_t row = static_cast<std::size_t>(ds.steps()) * ds.channels();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= ds.meta.n) {
      throw DataError("gather_batch: index " + std::to_string(idx[i]) + " out of range");
    }
    std::copy_n(ds.sample(static_cast<int>(idx[i])), row,
                b.inputs.v.begin() + i * row);
    b.labels[i] = ds.labels[idx[i]];
  }
  return b;
}

}  // namespace snn
