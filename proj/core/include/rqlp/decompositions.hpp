#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rqlp/kernels.hpp"
#include "rqlp/matrix.hpp"
#include "rqlp/random.hpp"

namespace rqlp {

/// Where the Gaussian sketch of a randomized factorization came from: the
/// stream seed and the stream position at which the m×n sketch began.
struct SketchOrigin {
  std::uint64_t seed = 0;
  std::uint64_t offset = 0;
  Index rows = 0;
};

/// A = Q·L·Pᵀ with Q (m×n) and P (n×n) orthonormal and L (n×n) lower
/// triangular with a nonnegative diagonal.
///
/// Randomized factorizations carry their sketch origin so the leading
/// columns of Ω can be regenerated on demand; pivoted factorizations carry
/// none.
struct QlpFactors {
  DenseMatrix q;
  DenseMatrix l;
  DenseMatrix p;
  std::optional<SketchOrigin> sketch;

  Index rows() const noexcept { return q.rows(); }
  Index cols() const noexcept { return l.cols(); }

  /// diag(L) in factor order.
  std::vector<double> diagonal() const { return l.diagonal(); }
  /// |diag(L)| sorted nonincreasing: the singular value estimates.
  std::vector<double> sorted_diagonal() const;

  /// First k columns of the sketch Ω, regenerated from the recorded seed.
  /// Throws NotApplicableError when the factorization has no sketch.
  DenseMatrix omega_head(Index k) const;
};

/// Randomized QLP: Ω ~ N(0,1)^{m×n}; Q̄ = orth(AᵀΩ); Q = orth(A·Q̄);
/// P·R = (QᵀA)ᵀ; L = Rᵀ. Consumes m·n samples from `stream`.
QlpFactors rand_qlp(const DenseMatrix& a, GaussianStream& stream, const QrOptions& options = {});

/// Pivoted QLP: A·Π = Q₀·R₀, then R₀ᵀ·Π́ = Q́·Ŕ, giving Q = Q₀·Π́, L = Ŕᵀ,
/// P = Π·Q́. The second permutation is absorbed into Q, so L stays lower
/// triangular and diag(L) = diag(Ŕ) in pivot order.
QlpFactors pivoted_qlp(const DenseMatrix& a, const QrOptions& options = {});

/// The SVD viewed as a QLP triple (Q = U, L = diag(σ), P = V); no sketch.
QlpFactors svd_as_qlp(const SvdFactors& svd);

/// Q·L·Pᵀ.
DenseMatrix reconstruct(const QlpFactors& f, int threads = 1);

/// Q·[L₁₁; L₂₁]·P₁ᵀ, the rank-k truncation. Requires 1 ≤ k ≤ n.
DenseMatrix rank_k_approx(const QlpFactors& f, Index k, int threads = 1);

/// Operation counts from the cost model: 8mn² + 3n³ − 2n² for the
/// randomized QLP and 2mn² + n³ + 4(m²n − mn²) for CPQR. Requires m ≥ n ≥ 1.
std::uint64_t flops_rand_qlp(std::uint64_t m, std::uint64_t n);
std::uint64_t flops_cpqr(std::uint64_t m, std::uint64_t n);

}  // namespace rqlp
