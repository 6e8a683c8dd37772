#include "snn/checksum.hpp"

#include <zlib.h>

#include <cstdio>

namespace snn {

std::uint32_t crc32_bytes(const void* data, std::size_t len, std::uint32_t seed) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uLong crc = seed;
  while (len > 0) {
    const uInt chunk = len > (1u << 30) ? (1u << 30) : static_cast<uInt>(len);
    crc = crc32(crc, p, chunk);
    p += chunk;
    len -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace snn
