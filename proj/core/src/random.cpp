#include "rqlp/random.hpp"

#include <cmath>
#include <numbers>

namespace rqlp {

namespace {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double GaussianStream::uniform_at(std::uint64_t seed, std::uint64_t counter) noexcept {
  const std::uint64_t key = mix64(seed + 0x9e3779b97f4a7c15ULL);
  const std::uint64_t bits = mix64(key ^ mix64(counter * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

double GaussianStream::sample_at(std::uint64_t seed, std::uint64_t index) noexcept {
  const std::uint64_t pair = index >> 1;
  const double u1 = uniform_at(seed, 2 * pair);
  const double u2 = uniform_at(seed, 2 * pair + 1);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (index & 1) == 0 ? radius * std::cos(angle) : radius * std::sin(angle);
}

void GaussianStream::fill(std::span<double> out) noexcept {
  std::size_t i = 0;
  if (i < out.size() && (position_ & 1) != 0) out[i++] = next();
  // Whole pairs share one radius and angle.
  for (; i + 1 < out.size(); i += 2) {
    const std::uint64_t pair = position_ >> 1;
    const double u1 = uniform_at(seed_, 2 * pair);
    const double u2 = uniform_at(seed_, 2 * pair + 1);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[i] = radius * std::cos(angle);
    out[i + 1] = radius * std::sin(angle);
    position_ += 2;
  }
  if (i < out.size()) out[i] = next();
}

}  // namespace rqlp
