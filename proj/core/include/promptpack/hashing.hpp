#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace promptpack {

// 64-bit FNV-1a. Used for content hashes (dictionary binding, cache keys) and
// for feature hashing in the offline embedder; stable across platforms.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Lower-case hex rendering of fnv1a64, prefixed with "fnv1a64:".
std::string content_hash(std::string_view bytes);

}  // namespace promptpack
