#include <algorithm>
#include <cmath>
#include <numeric>

#include "rqlp/error.hpp"
#include "rqlp/kernels.hpp"

namespace rqlp {

namespace {

double norm2(const double* x, Index n) {
  double ssq_plain = 0.0;
  for (Index i = 0; i < n; ++i) ssq_plain += x[i] * x[i];
  // The plain sum is exact enough unless it over- or underflowed.
  if (ssq_plain > 1e-280 && ssq_plain < 1e280) return std::sqrt(ssq_plain);
  if (ssq_plain == 0.0) {
    bool all_zero = true;
    for (Index i = 0; i < n && all_zero; ++i) all_zero = x[i] == 0.0;
    if (all_zero) return 0.0;
  }
  double scale = 0.0;
  double ssq = 1.0;
  for (Index i = 0; i < n; ++i) {
    if (x[i] == 0.0) continue;
    const double ax = std::abs(x[i]);
    if (scale < ax) {
      ssq = 1.0 + ssq * (scale / ax) * (scale / ax);
      scale = ax;
    } else {
      ssq += (ax / scale) * (ax / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

// Generates H = I − τ·v·vᵀ with H·x = β·e₁ in place: x[0] ← β, x[1:] ← v[1:]
// (v[0] = 1 implicit). Returns τ; τ = 0 means H = I.
double make_reflector(double* x, Index n) {
  if (n <= 1) return 0.0;
  const double alpha = x[0];
  const double xnorm = norm2(x + 1, n - 1);
  if (xnorm == 0.0) return 0.0;
  const double beta = -std::copysign(std::hypot(alpha, xnorm), alpha);
  const double tau = (beta - alpha) / beta;
  const double scale = 1.0 / (alpha - beta);
  for (Index i = 1; i < n; ++i) x[i] *= scale;
  x[0] = beta;
  return tau;
}

// Applies H = I − τ·v·vᵀ from the left to an n-row column c, where v is the
// reflector stored at `v` with implicit leading 1.
inline void apply_reflector(const double* v, double tau, double* c, Index n) {
  double w = c[0];
  for (Index i = 1; i < n; ++i) w += v[i] * c[i];
  w *= tau;
  c[0] -= w;
  for (Index i = 1; i < n; ++i) c[i] -= w * v[i];
}

// Explicit unit-lower-trapezoidal V (rows × jb) from the reflectors stored in
// packed(j:, j:j+jb).
DenseMatrix explicit_v(const DenseMatrix& packed, Index j, Index jb) {
  const Index rows = packed.rows() - j;
  DenseMatrix v(rows, jb);
  for (Index c = 0; c < jb; ++c) {
    v(c, c) = 1.0;
    for (Index i = c + 1; i < rows; ++i) v(i, c) = packed(j + i, j + c);
  }
  return v;
}

// Upper triangular T with H₁⋯H_jb = I − V·T·Vᵀ (forward, columnwise).
DenseMatrix triangular_factor(const DenseMatrix& v, std::span<const double> tau) {
  const Index jb = v.cols();
  DenseMatrix t(jb, jb);
  std::vector<double> w(static_cast<std::size_t>(jb));
  for (Index i = 0; i < jb; ++i) {
    const double ti = tau[static_cast<std::size_t>(i)];
    t(i, i) = ti;
    if (ti == 0.0) continue;
    // w = V(:, 0:i)ᵀ v_i
    for (Index c = 0; c < i; ++c) {
      double s = 0.0;
      for (Index r = i; r < v.rows(); ++r) s += v(r, c) * v(r, i);
      w[static_cast<std::size_t>(c)] = s;
    }
    // T(0:i, i) = −τᵢ T(0:i, 0:i) w
    for (Index r = 0; r < i; ++r) {
      double s = 0.0;
      for (Index c = r; c < i; ++c) s += t(r, c) * w[static_cast<std::size_t>(c)];
      t(r, i) = -ti * s;
    }
  }
  return t;
}

// C ← (I − V·op(T)·Vᵀ)·C for the block C = target(row:, col:col+ncols).
void apply_block_reflector(const DenseMatrix& v, const DenseMatrix& t, Transpose op_t,
                           DenseMatrix& target, Index row, Index col, Index ncols, int threads) {
  if (ncols <= 0) return;
  const Index rows = v.rows();
  const Index jb = v.cols();
  const Index ld = target.rows();
  double* c = target.data() + row + col * ld;

  DenseMatrix work(jb, ncols);
  gemm(Transpose::Yes, Transpose::No, jb, ncols, rows, 1.0, v.data(), rows, c, ld, 0.0, work.data(),
       jb, threads);
  DenseMatrix tw(jb, ncols);
  gemm(op_t, Transpose::No, jb, ncols, jb, 1.0, t.data(), jb, work.data(), jb, 0.0, tw.data(), jb,
       threads);
  gemm(Transpose::No, Transpose::No, rows, ncols, jb, -1.0, v.data(), rows, tw.data(), jb, 1.0, c,
       ld, threads);
}

void require_tall(const DenseMatrix& a, const char* op) {
  if (a.rows() < a.cols()) {
    throw ShapeError(std::string(op) + " requires rows >= cols, got " + a.shape());
  }
}

}  // namespace

namespace detail {

DenseMatrix form_q(const HouseholderQr& h, Index block_size, int threads) {
  const Index m = h.packed.rows();
  const Index n = h.packed.cols();
  DenseMatrix q = DenseMatrix::identity(m, n);
  const Index nb = std::max<Index>(block_size, 1);
  // Reflectors are applied last-to-first; block j touches only q(j:, j:).
  const Index last_block = n == 0 ? 0 : ((n - 1) / nb) * nb;
  for (Index j = last_block; j >= 0; j -= nb) {
    const Index jb = std::min(nb, n - j);
    if (jb <= 0) continue;
    const DenseMatrix v = explicit_v(h.packed, j, jb);
    const DenseMatrix t = triangular_factor(
        v, std::span<const double>(h.tau).subspan(static_cast<std::size_t>(j), static_cast<std::size_t>(jb)));
    apply_block_reflector(v, t, Transpose::No, q, j, j, n - j, threads);
  }
  return q;
}

DenseMatrix extract_r(const DenseMatrix& packed) {
  const Index n = packed.cols();
  DenseMatrix r(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) r(i, j) = packed(i, j);
  }
  return r;
}

void make_diagonal_nonnegative(DenseMatrix& q, DenseMatrix& r) {
  for (Index i = 0; i < r.rows(); ++i) {
    if (r(i, i) >= 0.0) continue;
    for (Index j = i; j < r.cols(); ++j) r(i, j) = -r(i, j);
    for (double& x : q.col(i)) x = -x;
  }
}

}  // namespace detail

QrFactors qr(const DenseMatrix& a, const QrOptions& options) {
  require_tall(a, "qr");
  const Index m = a.rows();
  const Index n = a.cols();
  const Index nb = n <= options.block_size ? n : std::max<Index>(options.block_size, 1);

  detail::HouseholderQr h{a, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
  DenseMatrix& w = h.packed;

  for (Index j = 0; j < n; j += nb) {
    const Index jb = std::min(nb, n - j);
    // Unblocked panel factorization.
    for (Index c = j; c < j + jb; ++c) {
      double* col = w.data() + c + c * m;
      const double tau = make_reflector(col, m - c);
      h.tau[static_cast<std::size_t>(c)] = tau;
      if (tau == 0.0) continue;
      for (Index k = c + 1; k < j + jb; ++k) apply_reflector(col, tau, w.data() + c + k * m, m - c);
    }
    // Trailing update with the block reflector Hᵀ = I − V·Tᵀ·Vᵀ.
    if (j + jb < n) {
      const DenseMatrix v = explicit_v(w, j, jb);
      const DenseMatrix t = triangular_factor(
          v, std::span<const double>(h.tau).subspan(static_cast<std::size_t>(j), static_cast<std::size_t>(jb)));
      apply_block_reflector(v, t, Transpose::Yes, w, j, j + jb, n - j - jb, options.threads);
    }
  }

  QrFactors out{detail::form_q(h, nb, options.threads), detail::extract_r(w)};
  detail::make_diagonal_nonnegative(out.q, out.r);
  return out;
}

CpqrFactors cpqr(const DenseMatrix& a, const QrOptions& options) {
  require_tall(a, "cpqr");
  const Index m = a.rows();
  const Index n = a.cols();

  detail::HouseholderQr h{a, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
  DenseMatrix& w = h.packed;
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});

  // Running (downdated) trailing column norms and the reference value they
  // were last recomputed from.
  std::vector<double> norms(static_cast<std::size_t>(n));
  std::vector<double> reference(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    norms[static_cast<std::size_t>(j)] = norm2(w.data() + j * m, m);
    reference[static_cast<std::size_t>(j)] = norms[static_cast<std::size_t>(j)];
  }

  for (Index i = 0; i < n; ++i) {
    Index pivot = i;
    for (Index j = i + 1; j < n; ++j) {
      if (norms[static_cast<std::size_t>(j)] > norms[static_cast<std::size_t>(pivot)]) pivot = j;
    }
    if (pivot != i) {
      std::swap_ranges(w.col(i).begin(), w.col(i).end(), w.col(pivot).begin());
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pivot)]);
      std::swap(norms[static_cast<std::size_t>(i)], norms[static_cast<std::size_t>(pivot)]);
      std::swap(reference[static_cast<std::size_t>(i)], reference[static_cast<std::size_t>(pivot)]);
    }

    double* col = w.data() + i + i * m;
    const double tau = make_reflector(col, m - i);
    h.tau[static_cast<std::size_t>(i)] = tau;
    for (Index j = i + 1; j < n; ++j) {
      double* cj = w.data() + i + j * m;
      if (tau != 0.0) apply_reflector(col, tau, cj, m - i);

      auto& nj = norms[static_cast<std::size_t>(j)];
      if (nj == 0.0) continue;
      const double ratio = std::abs(cj[0]) / nj;
      nj *= std::sqrt(std::max(0.0, (1.0 - ratio) * (1.0 + ratio)));
      if (nj < 0.1 * reference[static_cast<std::size_t>(j)]) {
        nj = norm2(cj + 1, m - i - 1);
        reference[static_cast<std::size_t>(j)] = nj;
      }
    }
  }

  CpqrFactors out{detail::form_q(h, options.block_size, options.threads), detail::extract_r(w),
                  std::move(perm)};
  detail::make_diagonal_nonnegative(out.q, out.r);
  return out;
}

}  // namespace rqlp
