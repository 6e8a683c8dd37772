#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "snn/error.hpp"

namespace snn {

// splitmix64 finalizer; statistically strong mixing of a 64-bit word.
constexpr std::uint64_t mix_u64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Pure counter-based draw: the same (seed, stream, counter) triple always
// yields the same word, so any sample/batch/epoch can be regenerated in
// isolation and in parallel.
constexpr std::uint64_t rng_word(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t counter) {
  std::uint64_t key = mix_u64(mix_u64(seed ^ 0x5851f42d4c957f2dull) ^ stream);
  return mix_u64(key + counter * 0x9e3779b97f4a7c15ull);
}

// Stateless-by-construction stream: holds (seed, stream) and a running
// counter. Copying the stream forks the draw position.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;

  RngStream() = default;
  RngStream(std::uint64_t seed_, std::uint64_t stream_) : seed(seed_), stream(stream_) {}

  std::uint64_t next_u64() { return rng_word(seed, stream, counter++); }

  // Uniform double in [0, 1) with 53 random bits; advances the counter by 1.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n); advances the counter by 1.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw DistributionError("uniform_index: n must be positive");
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    return static_cast<std::uint64_t>(wide >> 64);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

// Draws one categorical index from `p`. Validates the distribution: every
// entry finite and >= 0, total within 1e-9 of 1. Advances the stream by
// exactly one draw.
inline int sample_categorical(RngStream& rng, std::span<const double> p) {
  if (p.empty()) throw DistributionError("sample_categorical: empty distribution");
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) {
      throw DistributionError("sample_categorical: negative or NaN probability");
    }
    total += x;
  }
  if (total < 1.0 - 1e-9 || total > 1.0 + 1e-9) {
    throw DistributionError("sample_categorical: probabilities sum to " +
                            std::to_string(total));
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);
}

// Fisher-Yates; advances the stream by max(n - 1, 0) draws.
template <class T>
void shuffle(RngStream& rng, std::vector<T>& items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(items[i - 1], items[j]);
  }
}

template <class S>
void fill_uniform(RngStream& rng, S* p, std::size_t n, double lo, double hi) {
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = static_cast<S>(rng.uniform(lo, hi));
  }
}

// Stream-id layout. Every consumer of randomness owns a distinct stream so
// that adding draws in one place never perturbs another.
namespace streams {
constexpr std::uint64_t kInitBase = 1u << 20;      // + 4*layer { w, r, kappa }
constexpr std::uint64_t kInitReadout = 1u << 21;   // readout weights
constexpr std::uint64_t kShuffleBase = 1u << 22;   // + epoch
constexpr std::uint64_t kSampleTrain = 0;          // + sample index
}  // namespace streams

}  // namespace snn
