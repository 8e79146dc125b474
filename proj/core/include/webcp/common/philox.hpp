#pragma once

#include <array>
#include <cstdint>

namespace webcp {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A stream is identified by (key, counter); each call to `block()` is a pure
/// function of both, so streams can be evaluated in any order or in parallel.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;

  static Key key_from_seed(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }
};

/// Sequential view over a Philox substream addressed by (seed, stream id).
///
/// Draws walk the low 64 bits of the counter; the stream id fills the high 64
/// bits, so distinct stream ids never overlap.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_(Philox4x32::key_from_seed(seed)), stream_id_(stream_id) {}

  std::uint64_t next_u64() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; portable across standard libraries.
  double normal() noexcept;

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_id_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace webcp
