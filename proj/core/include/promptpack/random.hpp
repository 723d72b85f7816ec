#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace promptpack {

// Seeded generator whose draws are bit-identical on every platform.
// std::mt19937_64's output sequence is fixed by the standard; the standard
// distributions are not, so the draws below are done by hand.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). bound must be > 0. Rejection sampling, no modulo bias.
  std::size_t uniform_index(std::size_t bound) {
    const std::uint64_t n = bound;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % n);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace promptpack
