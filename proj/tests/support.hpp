#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "rqlp/kernels.hpp"
#include "rqlp/matgen.hpp"
#include "rqlp/matrix.hpp"
#include "rqlp/random.hpp"

namespace rqlp::test {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

inline double orthonormality_tol(Index n) { return 64.0 * static_cast<double>(n) * kEps; }

// Entries uniform in [−1, 1].
inline DenseMatrix uniform_matrix(Index rows, Index cols, std::uint64_t seed) {
  DenseMatrix a(rows, cols);
  std::uint64_t counter = 0;
  for (double& x : a.values()) x = 2.0 * GaussianStream::uniform_at(seed, counter++) - 1.0;
  return a;
}

inline DenseMatrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  GaussianStream stream(seed);
  return gaussian_matrix(stream, rows, cols);
}

inline DenseMatrix naive_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (Index p = 0; p < a.cols(); ++p) s += a(i, p) * b(p, j);
      c(i, j) = s;
    }
  }
  return c;
}

// m×n matrix U·diag(σ)·Vᵀ with Haar-random orthonormal U and V.
struct Constructed {
  DenseMatrix a;
  DenseMatrix u;
  DenseMatrix v;
  std::vector<double> sigma;
};

inline Constructed with_spectrum(Index m, const std::vector<double>& sigma, std::uint64_t seed) {
  const auto n = static_cast<Index>(sigma.size());
  GaussianStream stream(seed);
  Constructed c;
  c.u = random_orthogonal(stream, m).leading_cols(n);
  c.v = random_orthogonal(stream, n);
  c.sigma = sigma;
  DenseMatrix us = c.u;
  for (Index j = 0; j < n; ++j) {
    for (double& x : us.col(j)) x *= sigma[static_cast<std::size_t>(j)];
  }
  c.a = matmul(us, c.v, Transpose::No, Transpose::Yes);
  return c;
}

// Inverse by Gauss–Jordan elimination with partial pivoting; an oracle
// independent of the library's QR.
inline DenseMatrix gauss_jordan_inverse(DenseMatrix a) {
  const Index n = a.rows();
  DenseMatrix inv = DenseMatrix::identity(n);
  for (Index c = 0; c < n; ++c) {
    Index piv = c;
    for (Index r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    }
    for (Index j = 0; j < n; ++j) {
      std::swap(a(c, j), a(piv, j));
      std::swap(inv(c, j), inv(piv, j));
    }
    const double d = a(c, c);
    for (Index j = 0; j < n; ++j) {
      a(c, j) /= d;
      inv(c, j) /= d;
    }
    for (Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      if (f == 0.0) continue;
      for (Index j = 0; j < n; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

inline bool strictly_upper_is_zero(const DenseMatrix& l) {
  for (Index j = 1; j < l.cols(); ++j) {
    for (Index i = 0; i < j && i < l.rows(); ++i) {
      if (l(i, j) != 0.0) return false;
    }
  }
  return true;
}

inline bool strictly_lower_is_zero(const DenseMatrix& r) {
  for (Index j = 0; j < r.cols(); ++j) {
    for (Index i = j + 1; i < r.rows(); ++i) {
      if (r(i, j) != 0.0) return false;
    }
  }
  return true;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("rqlp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace rqlp::test
