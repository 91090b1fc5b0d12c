#include <algorithm>
#include <cmath>
#include <numeric>

#include "rqlp/error.hpp"
#include "rqlp/kernels.hpp"

namespace rqlp {

namespace {

struct JacobiResult {
  DenseMatrix w;  // columns are σⱼ·uⱼ on exit
  DenseMatrix v;  // empty unless accumulated
  int sweeps = 0;
};

// Rotates columns p, q of `w` (and of `v` when non-empty) until every pair
// of columns is orthogonal to the requested relative tolerance.
JacobiResult jacobi_sweeps(DenseMatrix w, bool accumulate_v, const JacobiOptions& options) {
  const Index m = w.rows();
  const Index n = w.cols();
  DenseMatrix v = accumulate_v ? DenseMatrix::identity(n) : DenseMatrix();

  double max_off = 0.0;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    max_off = 0.0;
    bool rotated = false;
    for (Index p = 0; p + 1 < n; ++p) {
      double* wp = w.data() + p * m;
      for (Index q = p + 1; q < n; ++q) {
        double* wq = w.data() + q * m;
        double alpha = 0.0;
        double beta = 0.0;
        double gamma = 0.0;
        for (Index i = 0; i < m; ++i) {
          alpha += wp[i] * wp[i];
          beta += wq[i] * wq[i];
          gamma += wp[i] * wq[i];
        }
        if (alpha == 0.0 || beta == 0.0 || gamma == 0.0) continue;
        const double off = std::abs(gamma) / std::sqrt(alpha) / std::sqrt(beta);
        max_off = std::max(max_off, off);
        if (off <= options.tol) continue;

        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index i = 0; i < m; ++i) {
          const double x = wp[i];
          const double y = wq[i];
          wp[i] = c * x - s * y;
          wq[i] = s * x + c * y;
        }
        if (accumulate_v) {
          double* vp = v.data() + p * n;
          double* vq = v.data() + q * n;
          for (Index i = 0; i < n; ++i) {
            const double x = vp[i];
            const double y = vq[i];
            vp[i] = c * x - s * y;
            vq[i] = s * x + c * y;
          }
        }
      }
    }
    if (!rotated) return {std::move(w), std::move(v), sweep};
  }
  throw ConvergenceError("jacobi_svd did not converge after " + std::to_string(options.max_sweeps) +
                             " sweeps (max off-diagonal " + std::to_string(max_off) + ")",
                         options.max_sweeps, max_off);
}

double column_norm(std::span<const double> x) {
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : x) {
    if (v == 0.0) continue;
    const double av = std::abs(v);
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

std::vector<Index> descending_order(const std::vector<double>& values) {
  std::vector<Index> order(values.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    return values[static_cast<std::size_t>(x)] > values[static_cast<std::size_t>(y)];
  });
  return order;
}

// Fills columns of `u` listed in `missing` with unit vectors orthogonal to
// every other column (classical Gram–Schmidt, applied twice).
void complete_basis(DenseMatrix& u, const std::vector<Index>& missing) {
  const Index m = u.rows();
  std::vector<bool> filled(static_cast<std::size_t>(u.cols()), true);
  for (Index j : missing) filled[static_cast<std::size_t>(j)] = false;
  Index candidate = 0;
  for (Index j : missing) {
    while (candidate < m) {
      std::vector<double> x(static_cast<std::size_t>(m), 0.0);
      x[static_cast<std::size_t>(candidate++)] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (Index c = 0; c < u.cols(); ++c) {
          if (!filled[static_cast<std::size_t>(c)]) continue;
          auto uc = u.col(c);
          const double d = std::inner_product(uc.begin(), uc.end(), x.begin(), 0.0);
          for (Index i = 0; i < m; ++i) x[static_cast<std::size_t>(i)] -= d * uc[static_cast<std::size_t>(i)];
        }
      }
      const double nx = column_norm(x);
      if (nx > 0.5) {
        auto uj = u.col(j);
        for (Index i = 0; i < m; ++i) uj[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] / nx;
        filled[static_cast<std::size_t>(j)] = true;
        break;
      }
    }
  }
}

}  // namespace

SvdFactors jacobi_svd(const DenseMatrix& a, const JacobiOptions& options) {
  if (a.rows() < a.cols()) {
    throw ShapeError("jacobi_svd requires rows >= cols, got " + a.shape());
  }
  const Index m = a.rows();
  const Index n = a.cols();
  JacobiResult res = jacobi_sweeps(a, true, options);

  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) norms[static_cast<std::size_t>(j)] = column_norm(res.w.col(j));
  const std::vector<Index> order = descending_order(norms);

  SvdFactors out{DenseMatrix(m, n), std::vector<double>(static_cast<std::size_t>(n)), DenseMatrix(n, n)};
  std::vector<Index> missing;
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    const double s = norms[static_cast<std::size_t>(src)];
    out.sigma[static_cast<std::size_t>(j)] = s;
    std::copy(res.v.col(src).begin(), res.v.col(src).end(), out.v.col(j).begin());
    if (s == 0.0) {
      missing.push_back(j);
      continue;
    }
    auto dst = out.u.col(j);
    auto col = res.w.col(src);
    for (Index i = 0; i < m; ++i) dst[static_cast<std::size_t>(i)] = col[static_cast<std::size_t>(i)] / s;
  }
  if (!missing.empty()) complete_basis(out.u, missing);
  return out;
}

std::vector<double> singular_values(const DenseMatrix& a, const JacobiOptions& options) {
  if (a.empty()) return {};
  JacobiResult res = jacobi_sweeps(a.rows() >= a.cols() ? a : a.transpose(), false, options);
  std::vector<double> sigma(static_cast<std::size_t>(res.w.cols()));
  for (Index j = 0; j < res.w.cols(); ++j) sigma[static_cast<std::size_t>(j)] = column_norm(res.w.col(j));
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

NormEstimate spectral_norm(const DenseMatrix& a, double tol, int max_iter) {
  if (a.empty()) throw ShapeError("spectral_norm of an empty matrix");
  if (!(tol > 0.0)) throw ParameterError("spectral_norm tolerance must be positive");
  if (std::min(a.rows(), a.cols()) <= 32) {
    return {singular_values(a).front(), true, 0};
  }

  const Index m = a.rows();
  const Index n = a.cols();
  GaussianStream stream(0x5eedULL);
  std::vector<double> x(static_cast<std::size_t>(n));
  stream.fill(x);
  double nx = column_norm(x);
  for (double& v : x) v /= nx;

  std::vector<double> y(static_cast<std::size_t>(m));
  std::vector<double> z(static_cast<std::size_t>(n));
  NormEstimate est;
  double previous = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    gemm(Transpose::No, Transpose::No, m, 1, n, 1.0, a.data(), m, x.data(), n, 0.0, y.data(), m);
    gemm(Transpose::Yes, Transpose::No, n, 1, m, 1.0, a.data(), m, y.data(), m, 0.0, z.data(), n);
    const double sigma = column_norm(y);
    est.value = std::max(est.value, sigma);
    est.iterations = it;
    const double nz = column_norm(z);
    if (nz == 0.0) {
      est.converged = true;
      return est;
    }
    if (it > 1 && std::abs(sigma - previous) < tol * sigma) {
      est.converged = true;
      return est;
    }
    previous = sigma;
    for (Index i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] / nz;
  }
  return est;
}

DenseMatrix gaussian_matrix(GaussianStream& stream, Index rows, Index cols) {
  if (rows < 1 || cols < 1) {
    throw ParameterError("gaussian_matrix needs positive dimensions, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
  DenseMatrix out(rows, cols);
  stream.fill(out.values());
  return out;
}

}  // namespace rqlp
