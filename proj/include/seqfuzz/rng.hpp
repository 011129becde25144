#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace seqfuzz {

/// Seeded generator used by every randomized component. Draws are derived
/// from the raw 64-bit engine output so sequences are identical across
/// standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n); n == 0 yields 0.
  std::size_t below(std::size_t n) {
    if (n == 0) return 0;
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(n)) >> 64);
  }

  /// Uniform in [lo, hi].
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }

  bool coin() { return (engine_() >> 63) != 0; }

  std::uint8_t byte() { return static_cast<std::uint8_t>(engine_() >> 56); }

private:
  std::mt19937_64 engine_;
};

} // namespace seqfuzz
