#pragma once

#include <vector>

#include "rqlp/matrix.hpp"
#include "rqlp/random.hpp"

namespace rqlp {

enum class Transpose { No, Yes };

/// op(A)·op(B), cache-blocked with packed panels.
///
/// threads > 1 splits the columns of the result across worker threads; the
/// split is aligned to the micro-kernel width so every entry is accumulated
/// in the same order regardless of thread count.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b, Transpose transpose_a = Transpose::No,
                   Transpose transpose_b = Transpose::No, int threads = 1);

/// Raw GEMM: C ← alpha·op(A)·op(B) + beta·C on column-major storage with
/// leading dimensions. op(A) is m×k, op(B) is k×n.
void gemm(Transpose transpose_a, Transpose transpose_b, Index m, Index n, Index k, double alpha,
          const double* a, Index lda, const double* b, Index ldb, double beta, double* c, Index ldc,
          int threads = 1);

struct QrOptions {
  /// Panel width of the compact-WY blocking. Matrices with cols ≤ block_size
  /// take the unblocked path.
  Index block_size = 32;
  int threads = 1;
};

/// Thin QR: A = Q·R, Q m×n with orthonormal columns, R n×n upper triangular
/// with a nonnegative diagonal.
struct QrFactors {
  DenseMatrix q;
  DenseMatrix r;
};

/// Column-pivoted thin QR: A·Π = Q·R, where perm[j] is the column of A that
/// lands in position j. Diagonal of R is nonnegative and nonincreasing.
struct CpqrFactors {
  DenseMatrix q;
  DenseMatrix r;
  std::vector<Index> perm;
};

/// A = U·diag(sigma)·Vᵀ with sigma sorted nonincreasing.
struct SvdFactors {
  DenseMatrix u;
  std::vector<double> sigma;
  DenseMatrix v;
};

QrFactors qr(const DenseMatrix& a, const QrOptions& options = {});
CpqrFactors cpqr(const DenseMatrix& a, const QrOptions& options = {});

struct JacobiOptions {
  /// Convergence when |gᵢⱼ| ≤ tol·√(gᵢᵢ·gⱼⱼ) for every column pair.
  double tol = 1e-14;
  int max_sweeps = 60;
};

/// One-sided (Hestenes) Jacobi SVD. Requires rows ≥ cols.
SvdFactors jacobi_svd(const DenseMatrix& a, const JacobiOptions& options = {});

/// Singular values only, nonincreasing. Any shape; the wider orientation
/// is handled by transposing.
std::vector<double> singular_values(const DenseMatrix& a, const JacobiOptions& options = {});

struct NormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Largest singular value. Power iteration on AᵀA from a fixed-seed start;
/// min(rows, cols) ≤ 32 is delegated to the Jacobi SVD and is exact.
NormEstimate spectral_norm(const DenseMatrix& a, double tol = 1e-8, int max_iter = 1000);

DenseMatrix gaussian_matrix(GaussianStream& stream, Index rows, Index cols);

namespace detail {

/// Householder reflectors of a QR factorization stored LAPACK-style: the
/// essential part of reflector j sits below the diagonal of column j of
/// `packed` (unit leading entry implicit), R on and above the diagonal.
struct HouseholderQr {
  DenseMatrix packed;
  std::vector<double> tau;
};

/// Explicit thin Q (m×n) from packed reflectors, applied in blocks of
/// block_size through the compact-WY representation.
DenseMatrix form_q(const HouseholderQr& h, Index block_size, int threads);

/// Upper triangle of the leading n×n block of `packed`.
DenseMatrix extract_r(const DenseMatrix& packed);

/// Flips signs of (column of Q, row of R) pairs so that diag(R) ≥ 0.
void make_diagonal_nonnegative(DenseMatrix& q, DenseMatrix& r);

}  // namespace detail

}  // namespace rqlp
