#pragma once

#include <cstdint>
#include <random>

namespace stx {

/// Seedable 64-bit generator with portable draws.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
/// derives bounded integers and unit reals from raw 64-bit words instead of
/// the implementation-defined std distributions, so a seed reproduces the
/// same search on every platform.
///
/// Streams: `Rng::stream(seed, k)` seeds generator k with
/// splitmix64(seed ^ splitmix64(k + 1)). Batch runs give instance k stream k,
/// which keeps per-instance results independent of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t stream_index) {
    return Rng(stream_seed(seed, stream_index));
  }
  static std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Uniform real in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform real in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace stx
