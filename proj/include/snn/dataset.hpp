#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "snn/checksum.hpp"
#include "snn/rng.hpp"
#include "snn/tensor.hpp"

namespace snn {

// Autonomous-localization actions, in channel order.
enum class AlAction : int { TurnLeft = 0, TurnRight = 1, GoStraight = 2, Stop = 3 };

constexpr int kAlChannels = 4;
constexpr int kAlClasses = 2;

struct AlSpec {
  int length = 200;
  std::array<double, 4> probs{0.05, 0.05, 0.45, 0.45};  // TL, TR, GO, STOP
  int train_count = 50000;
  int test_count = 5000;
  std::uint64_t seed = 42;

  void validate() const;
  std::string fingerprint(const char* split, int count) const;
};

// Robot pose on the integer grid. Starts at the origin facing +y.
struct AlPose {
  long long x = 0;
  long long y = 0;
  int dx = 0;
  int dy = 1;
};

void al_apply(AlPose& pose, AlAction a);
AlPose al_rollout(const AlAction* actions, int n);

// Label rule: the robot ends in the left half-plane (x <= 0) -> class 0,
// otherwise class 1.
std::uint32_t al_label_from_final_x(long long x);

struct AlSample {
  std::vector<AlAction> actions;
  std::vector<float> onehot;  // length * kAlChannels
  std::uint32_t label = 0;
};

// Draws `spec.length` i.i.d. actions (exactly one rng tick each), rolls out
// the pose, and one-hot encodes the action stream.
AlSample generate_al_sample(RngStream& rng, const AlSpec& spec);

struct DatasetMeta {
  std::uint32_t n = 0;
  std::uint32_t steps = 0;
  std::uint32_t channels = 0;
  std::uint32_t classes = 0;
  std::string encoding;
  std::string fingerprint;
  std::vector<double> class_freq;
  std::vector<double> action_freq;
  std::uint32_t crc_data = 0;
  std::uint32_t crc_labels = 0;
};

// In-memory dataset: row-major [n, steps, channels] float block plus labels.
struct Dataset {
  DatasetMeta meta;
  std::vector<float> data;
  std::vector<std::uint32_t> labels;

  int n() const { return static_cast<int>(meta.n); }
  int steps() const { return static_cast<int>(meta.steps); }
  int channels() const { return static_cast<int>(meta.channels); }
  const float* sample(int i) const {
    return data.data() + static_cast<std::size_t>(i) * meta.steps * meta.channels;
  }
  std::uint32_t label(int i) const { return labels[i]; }
};

Dataset generate_al_split(const AlSpec& spec, bool test_split);

// On-disk layout per split directory:
//   meta.json   dataset metadata incl. payload checksums
//   data.f32    little-endian float32, row-major [n, steps, channels]
//   labels.u32  little-endian uint32, [n]
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

// Writes train/ and test/ splits under out_dir.
void generate_al_dataset(const AlSpec& spec, const std::filesystem::path& out_dir);

struct Batch {
  Seq32 inputs;
  std::vector<std::uint32_t> labels;
  std::vector<std::uint32_t> indices;
};

// Splits [0, n) into ceil(n / batch_size) contiguous chunks, optionally
// after an in-place shuffle drawn from `shuffle_rng`.
std::vector<std::vector<std::uint32_t>> batch_partition(std::uint32_t n, int batch_size,
                                                        RngStream* shuffle_rng);
Batch gather_batch(const Dataset& ds, const std::vector<std::uint32_t>& idx);

}  // namespace snn
