#include "rqlp/decompositions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rqlp/error.hpp"

namespace rqlp {

namespace {

void require_input(const DenseMatrix& a, const char* op) {
  if (a.rows() < a.cols()) {
    throw ShapeError(std::string(op) + " requires rows >= cols, got " + a.shape());
  }
  if (a.cols() == 0) throw ShapeError(std::string(op) + " of an empty matrix");
  if (!a.all_finite()) throw InputError(std::string(op) + ": input contains non-finite entries");
}

}  // namespace

std::vector<double> QlpFactors::sorted_diagonal() const {
  std::vector<double> d = l.diagonal();
  for (double& x : d) x = std::abs(x);
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

DenseMatrix QlpFactors::omega_head(Index k) const {
  if (!sketch) throw NotApplicableError("factorization carries no sketch (not randomized)");
  if (k < 1 || k > cols()) {
    throw ParameterError("omega_head: k = " + std::to_string(k) + " outside [1, " +
                         std::to_string(cols()) + "]");
  }
  // Ω is filled column-major, so its first k columns are a prefix of the stream.
  GaussianStream stream(sketch->seed, sketch->offset);
  return gaussian_matrix(stream, sketch->rows, k);
}

QlpFactors rand_qlp(const DenseMatrix& a, GaussianStream& stream, const QrOptions& options) {
  require_input(a, "rand_qlp");
  const Index m = a.rows();
  const Index n = a.cols();
  const int th = options.threads;

  const SketchOrigin origin{stream.seed(), stream.position(), m};
  const DenseMatrix omega = gaussian_matrix(stream, m, n);

  const DenseMatrix q_bar = qr(matmul(a, omega, Transpose::Yes, Transpose::No, th), options).q;
  DenseMatrix q = qr(matmul(a, q_bar, Transpose::No, Transpose::No, th), options).q;
  // (QᵀA)ᵀ = AᵀQ
  QrFactors pr = qr(matmul(a, q, Transpose::Yes, Transpose::No, th), options);

  return QlpFactors{std::move(q), pr.r.transpose(), std::move(pr.q), origin};
}

QlpFactors pivoted_qlp(const DenseMatrix& a, const QrOptions& options) {
  require_input(a, "pivoted_qlp");
  const CpqrFactors first = cpqr(a, options);
  CpqrFactors second = cpqr(first.r.transpose(), options);

  DenseMatrix q = permute_cols(first.q, second.perm);
  // P = Π·Q́: row perm[j] of P is row j of Q́.
  const Index n = a.cols();
  DenseMatrix p(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) p(first.perm[static_cast<std::size_t>(i)], j) = second.q(i, j);
  }
  return QlpFactors{std::move(q), second.r.transpose(), std::move(p), std::nullopt};
}

QlpFactors svd_as_qlp(const SvdFactors& svd) {
  const auto n = static_cast<Index>(svd.sigma.size());
  return QlpFactors{svd.u, DenseMatrix::diagonal(svd.sigma, n, n), svd.v, std::nullopt};
}

DenseMatrix reconstruct(const QlpFactors& f, int threads) {
  const DenseMatrix ql = matmul(f.q, f.l, Transpose::No, Transpose::No, threads);
  return matmul(ql, f.p, Transpose::No, Transpose::Yes, threads);
}

DenseMatrix rank_k_approx(const QlpFactors& f, Index k, int threads) {
  const Index n = f.cols();
  if (k < 1 || k > n) {
    throw ParameterError("rank_k_approx: k = " + std::to_string(k) + " outside [1, " +
                         std::to_string(n) + "]");
  }
  const DenseMatrix ql = matmul(f.q, f.l.leading_cols(k), Transpose::No, Transpose::No, threads);
  return matmul(ql, f.p.leading_cols(k), Transpose::No, Transpose::Yes, threads);
}

std::uint64_t flops_rand_qlp(std::uint64_t m, std::uint64_t n) {
  if (n < 1 || m < n) throw ParameterError("flops_rand_qlp requires m >= n >= 1");
  return 8 * m * n * n + 3 * n * n * n - 2 * n * n;
}

std::uint64_t flops_cpqr(std::uint64_t m, std::uint64_t n) {
  if (n < 1 || m < n) throw ParameterError("flops_cpqr requires m >= n >= 1");
  return 2 * m * n * n + n * n * n + 4 * (m * m * n - m * n * n);
}

}  // namespace rqlp
