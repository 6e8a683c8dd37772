#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace snn {

// CRC-32 (zlib polynomial) over a byte range; chain via `seed`.
std::uint32_t crc32_bytes(const void* data, std::size_t len, std::uint32_t seed = 0);

// FNV-1a 64-bit over a string, as a fixed-width lowercase hex string.
std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t value);

}  // namespace snn
