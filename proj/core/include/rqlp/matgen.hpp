#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rqlp/matrix.hpp"
#include "rqlp/random.hpp"

namespace rqlp {

enum class SpectrumKind { NoisyLowRank, FastDecay, SShaped, Linear, Custom };

/// How the Gaussian noise matrix N is scaled before adding
/// noise_level·σ_k·N.
enum class NoiseNormalization {
  Spectral,  ///< entries N(0,1)/(√m + √n), so ‖N‖₂ ≈ 1
  Entry,     ///< raw N(0,1) entries
  Column,    ///< every column scaled to unit 2-norm
};

std::string_view to_string(SpectrumKind kind);
std::string_view to_string(NoiseNormalization mode);
SpectrumKind parse_spectrum_kind(std::string_view name);
NoiseNormalization parse_noise_normalization(std::string_view name);

/// Declarative singular value profile of a synthetic test matrix.
///
/// noisy-low-rank  σ linear from ramp_start (i = 1) to ramp_end (i = k),
///                 zero beyond k, plus noise_level·σ_k·N.
/// fast-decay      σᵢ = i⁻².
/// s-shaped        floor + (1 − floor)/(1 + exp(steepness·(i − midpoint))).
/// linear          σ linear from ramp_start (i = 1) to ramp_end (i = n).
/// custom          `values`, which must be nonnegative and nonincreasing.
struct SpectrumSpec {
  SpectrumKind kind = SpectrumKind::FastDecay;
  Index n = 0;
  Index m = 0;  ///< rows; 0 means square
  Index k = 0;
  double noise_level = 0.05;
  NoiseNormalization normalization = NoiseNormalization::Spectral;
  double ramp_start = 1.0;
  double ramp_end = 1e-3;
  double floor = 0.01;
  double steepness = 0.0;  ///< 0 selects 20/n
  double midpoint = 0.0;   ///< 0 selects n/2
  std::vector<double> values;

  Index rows() const noexcept { return m == 0 ? n : m; }
  /// Throws ParameterError on an invalid combination.
  void validate() const;
  /// Ground-truth singular values (length n, nonincreasing).
  std::vector<double> singular_values() const;

  std::string to_json() const;
  static SpectrumSpec from_json(std::string_view text);
};

/// A synthetic matrix with the factors of its noiseless part.
struct TestMatrix {
  DenseMatrix a;
  DenseMatrix u_true;  ///< m×n, orthonormal
  std::vector<double> sigma_true;
  DenseMatrix v_true;  ///< n×n, orthogonal
  SpectrumSpec spec;
  std::uint64_t seed = 0;
};

/// Haar-distributed orthogonal n×n matrix: Q of a Gaussian matrix with the
/// nonnegative-diagonal sign convention on R.
DenseMatrix random_orthogonal(GaussianStream& stream, Index n);

/// Builds A = U·diag(σ)·Vᵀ (+ noise for noisy-low-rank). Draws, in order,
/// the m×m left factor, the n×n right factor and the m×n noise from a
/// stream derived from `seed` (domain-separated, so a sketch stream with
/// the same integer seed is independent of the test matrix).
TestMatrix build(const SpectrumSpec& spec, std::uint64_t seed);

constexpr std::uint64_t kDefaultMemoryCap = std::uint64_t{2} << 30;

/// Dense matrix from a Matrix Market file (coordinate or array; real or
/// integer; general or symmetric). Duplicate coordinate entries are summed.
DenseMatrix matrix_market_read(const std::filesystem::path& path,
                               std::uint64_t memory_cap = kDefaultMemoryCap);
DenseMatrix matrix_market_parse(std::string_view text, std::uint64_t memory_cap = kDefaultMemoryCap);

}  // namespace rqlp
