#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rqlp {

using Index = std::ptrdiff_t;

/// Column-major dense matrix of doubles.
///
/// Element (i, j) lives at data()[i + j * rows()]. Columns are contiguous,
/// so col(j) hands out a span without copying. Block accessors copy; the
/// factorizations in this library are written against whole matrices and
/// the copies never sit on a hot path.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(Index rows, Index cols);
  DenseMatrix(Index rows, Index cols, std::vector<double> column_major);

  /// Row-major nested initializer, for literals in tests and examples:
  /// DenseMatrix::from_rows({{1, 2}, {3, 4}}).
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(Index n);
  static DenseMatrix identity(Index rows, Index cols);
  static DenseMatrix diagonal(std::span<const double> values, Index rows, Index cols);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return rows_ * cols_; }
  bool empty() const noexcept { return size() == 0; }
  std::string shape() const;

  double& operator()(Index i, Index j) noexcept { return data_[static_cast<std::size_t>(i + j * rows_)]; }
  double operator()(Index i, Index j) const noexcept {
    return data_[static_cast<std::size_t>(i + j * rows_)];
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  std::span<double> col(Index j) noexcept {
    return {data_.data() + j * rows_, static_cast<std::size_t>(rows_)};
  }
  std::span<const double> col(Index j) const noexcept {
    return {data_.data() + j * rows_, static_cast<std::size_t>(rows_)};
  }

  DenseMatrix transpose() const;
  DenseMatrix block(Index row, Index col, Index nrows, Index ncols) const;
  DenseMatrix leading_cols(Index ncols) const { return block(0, 0, rows_, ncols); }
  DenseMatrix trailing_cols(Index ncols) const { return block(0, cols_ - ncols, rows_, ncols); }
  void set_block(Index row, Index col, const DenseMatrix& src);

  std::vector<double> diagonal() const;
  bool all_finite() const noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

/// ‖AᵀA − I‖_max, the orthonormality defect of A's columns.
double orthonormality_defect(const DenseMatrix& a);

/// Permutes columns: result column j is a column perm[j].
DenseMatrix permute_cols(const DenseMatrix& a, std::span<const Index> perm);
/// Explicit permutation matrix Π with (A·Π)(:, j) = A(:, perm[j]).
DenseMatrix permutation_matrix(std::span<const Index> perm);

}  // namespace rqlp
