#pragma once

#include <cstdint>
#include <span>

namespace rqlp {

/// Deterministic stream of standard normal samples.
///
/// Sample t of a stream is a pure function of (seed, t): a counter-based
/// hash produces uniforms, and Box–Muller turns uniform pair t/2 into two
/// normals (cosine branch for even t, sine branch for odd t). Consequently
/// any prefix or slice of the stream can be regenerated without replaying
/// it, which is how sketch columns are recovered after a factorization.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed, std::uint64_t position = 0) noexcept
      : seed_(seed), position_(position) {}

  std::uint64_t seed() const noexcept { return seed_; }
  /// Number of samples drawn so far.
  std::uint64_t position() const noexcept { return position_; }

  double next() noexcept { return sample_at(seed_, position_++); }
  void fill(std::span<double> out) noexcept;
  void skip(std::uint64_t count) noexcept { position_ += count; }

  static double sample_at(std::uint64_t seed, std::uint64_t index) noexcept;
  /// Uniform on (0, 1], 53-bit resolution.
  static double uniform_at(std::uint64_t seed, std::uint64_t counter) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t position_;
};

}  // namespace rqlp
