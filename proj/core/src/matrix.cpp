#include "rqlp/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "rqlp/error.hpp"
#include "rqlp/kernels.hpp"

namespace rqlp {

DenseMatrix::DenseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw ShapeError("negative matrix dimension");
  data_.assign(static_cast<std::size_t>(rows * cols), 0.0);
}

DenseMatrix::DenseMatrix(Index rows, Index cols, std::vector<double> column_major)
    : rows_(rows), cols_(cols), data_(std::move(column_major)) {
  if (rows < 0 || cols < 0) throw ShapeError("negative matrix dimension");
  if (data_.size() != static_cast<std::size_t>(rows * cols)) {
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match " +
                     shape());
  }
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const auto m = static_cast<Index>(rows.size());
  const Index n = m == 0 ? 0 : static_cast<Index>(rows.begin()->size());
  DenseMatrix out(m, n);
  Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != n) throw ShapeError("ragged row initializer");
    Index j = 0;
    for (double v : row) out(i, j++) = v;
    ++i;
  }
  return out;
}

DenseMatrix DenseMatrix::identity(Index n) { return identity(n, n); }

DenseMatrix DenseMatrix::identity(Index rows, Index cols) {
  DenseMatrix out(rows, cols);
  for (Index i = 0; i < std::min(rows, cols); ++i) out(i, i) = 1.0;
  return out;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values, Index rows, Index cols) {
  DenseMatrix out(rows, cols);
  const Index d = std::min({rows, cols, static_cast<Index>(values.size())});
  for (Index i = 0; i < d; ++i) out(i, i) = values[static_cast<std::size_t>(i)];
  return out;
}

std::string DenseMatrix::shape() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix out(cols_, rows_);
  constexpr Index tile = 32;
  for (Index jj = 0; jj < cols_; jj += tile) {
    for (Index ii = 0; ii < rows_; ii += tile) {
      const Index je = std::min(jj + tile, cols_);
      const Index ie = std::min(ii + tile, rows_);
      for (Index j = jj; j < je; ++j) {
        for (Index i = ii; i < ie; ++i) out(j, i) = (*this)(i, j);
      }
    }
  }
  return out;
}

DenseMatrix DenseMatrix::block(Index row, Index col, Index nrows, Index ncols) const {
  if (row < 0 || col < 0 || nrows < 0 || ncols < 0 || row + nrows > rows_ ||
      col + ncols > cols_) {
    throw ShapeError("block (" + std::to_string(row) + "," + std::to_string(col) + ") of size " +
                     std::to_string(nrows) + "x" + std::to_string(ncols) + " exceeds " + shape());
  }
  DenseMatrix out(nrows, ncols);
  for (Index j = 0; j < ncols; ++j) {
    const double* src = data() + row + (col + j) * rows_;
    std::copy(src, src + nrows, out.data() + j * nrows);
  }
  return out;
}

void DenseMatrix::set_block(Index row, Index col, const DenseMatrix& src) {
  if (row < 0 || col < 0 || row + src.rows() > rows_ || col + src.cols() > cols_) {
    throw ShapeError("cannot place " + src.shape() + " block into " + shape());
  }
  for (Index j = 0; j < src.cols(); ++j) {
    std::copy(src.col(j).begin(), src.col(j).end(), data() + row + (col + j) * rows_);
  }
}

std::vector<double> DenseMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(std::min(rows_, cols_)));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(static_cast<Index>(i), static_cast<Index>(i));
  return d;
}

bool DenseMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape() + " vs " + b.shape());
  }
}

}  // namespace

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "subtract");
  DenseMatrix out = a;
  auto dst = out.values();
  auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
  return out;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "add");
  DenseMatrix out = a;
  auto dst = out.values();
  auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return out;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

double frobenius_norm(const DenseMatrix& a) {
  // Scaled sum of squares; avoids overflow for huge entries.
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : a.values()) {
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

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

double orthonormality_defect(const DenseMatrix& a) {
  DenseMatrix gram = matmul(a, a, Transpose::Yes, Transpose::No);
  for (Index i = 0; i < gram.rows(); ++i) gram(i, i) -= 1.0;
  return max_abs(gram);
}

DenseMatrix permute_cols(const DenseMatrix& a, std::span<const Index> perm) {
  if (static_cast<Index>(perm.size()) != a.cols()) {
    throw ShapeError("permutation length " + std::to_string(perm.size()) + " does not match " +
                     a.shape());
  }
  DenseMatrix out(a.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    auto src = a.col(perm[static_cast<std::size_t>(j)]);
    std::copy(src.begin(), src.end(), out.col(j).begin());
  }
  return out;
}

DenseMatrix permutation_matrix(std::span<const Index> perm) {
  const auto n = static_cast<Index>(perm.size());
  DenseMatrix out(n, n);
  for (Index j = 0; j < n; ++j) out(perm[static_cast<std::size_t>(j)], j) = 1.0;
  return out;
}

}  // namespace rqlp
