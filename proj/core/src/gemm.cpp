#include <algorithm>
#include <thread>
#include <vector>

#include "rqlp/error.hpp"
#include "rqlp/kernels.hpp"

namespace rqlp {

namespace {

// Register tile of the micro-kernel (rows × cols of C).
constexpr Index kMr = 8;
constexpr Index kNr = 6;
// Cache blocking: kc×kNr slivers of B stay in L1, mc×kc of A in L2.
constexpr Index kMc = 96;
constexpr Index kKc = 256;
constexpr Index kNc = 1536;

// Below this many multiply-adds the packing overhead dominates.
constexpr Index kSmallProduct = 16 * 16 * 16;

struct Operand {
  const double* data;
  Index ld;
  bool transposed;

  double at(Index i, Index j) const noexcept {
    return transposed ? data[j + i * ld] : data[i + j * ld];
  }
};

// Packs op(A)(ic:ic+mc, pc:pc+kc) into kMr-row slivers, zero padded.
void pack_a(const Operand& a, Index ic, Index pc, Index mc, Index kc, double* out) {
  for (Index ir = 0; ir < mc; ir += kMr) {
    const Index mr = std::min(kMr, mc - ir);
    for (Index p = 0; p < kc; ++p) {
      Index i = 0;
      if (!a.transposed) {
        const double* src = a.data + (ic + ir) + (pc + p) * a.ld;
        for (; i < mr; ++i) out[i] = src[i];
      } else {
        for (; i < mr; ++i) out[i] = a.at(ic + ir + i, pc + p);
      }
      for (; i < kMr; ++i) out[i] = 0.0;
      out += kMr;
    }
  }
}

// Packs op(B)(pc:pc+kc, jc:jc+nc) into kNr-column slivers, zero padded.
void pack_b(const Operand& b, Index pc, Index jc, Index kc, Index nc, double* out) {
  for (Index jr = 0; jr < nc; jr += kNr) {
    const Index nr = std::min(kNr, nc - jr);
    for (Index p = 0; p < kc; ++p) {
      Index j = 0;
      for (; j < nr; ++j) out[j] = b.at(pc + p, jc + jr + j);
      for (; j < kNr; ++j) out[j] = 0.0;
      out += kNr;
    }
  }
}

constexpr Index round_up(Index x, Index step) { return (x + step - 1) / step * step; }

// acc(kMr×kNr) = Σ_p a_p b_pᵀ over packed slivers.
inline void micro_kernel(Index kc, const double* __restrict a, const double* __restrict b,
                         double* __restrict acc) {
  double c[kNr][kMr] = {};
  for (Index p = 0; p < kc; ++p) {
    for (Index j = 0; j < kNr; ++j) {
      const double bj = b[j];
      for (Index i = 0; i < kMr; ++i) c[j][i] += a[i] * bj;
    }
    a += kMr;
    b += kNr;
  }
  for (Index j = 0; j < kNr; ++j) {
    for (Index i = 0; i < kMr; ++i) acc[i + j * kMr] = c[j][i];
  }
}

void gemm_blocked(const Operand& a, const Operand& b, Index m, Index n, Index k, double alpha,
                  double* c, Index ldc) {
  // Packing buffers sized to this product and reused across calls, so small
  // products do not pay for zero-filling the full blocking footprint.
  thread_local std::vector<double> a_pack;
  thread_local std::vector<double> b_pack;
  const Index k_extent = std::min(kKc, k);
  const auto a_need = static_cast<std::size_t>(std::min(kMc, round_up(m, kMr)) * k_extent);
  const auto b_need = static_cast<std::size_t>(std::min(kNc, round_up(n, kNr)) * k_extent);
  if (a_pack.size() < a_need) a_pack.resize(a_need);
  if (b_pack.size() < b_need) b_pack.resize(b_need);
  double acc[kMr * kNr];

  for (Index jc = 0; jc < n; jc += kNc) {
    const Index nc = std::min(kNc, n - jc);
    for (Index pc = 0; pc < k; pc += kKc) {
      const Index kc = std::min(kKc, k - pc);
      pack_b(b, pc, jc, kc, nc, b_pack.data());
      for (Index ic = 0; ic < m; ic += kMc) {
        const Index mc = std::min(kMc, m - ic);
        pack_a(a, ic, pc, mc, kc, a_pack.data());
        for (Index jr = 0; jr < nc; jr += kNr) {
          const Index nr = std::min(kNr, nc - jr);
          const double* bp = b_pack.data() + (jr / kNr) * kc * kNr;
          for (Index ir = 0; ir < mc; ir += kMr) {
            const Index mr = std::min(kMr, mc - ir);
            const double* ap = a_pack.data() + (ir / kMr) * kc * kMr;
            micro_kernel(kc, ap, bp, acc);
            double* cblk = c + (ic + ir) + (jc + jr) * ldc;
            for (Index j = 0; j < nr; ++j) {
              for (Index i = 0; i < mr; ++i) cblk[i + j * ldc] += alpha * acc[i + j * kMr];
            }
          }
        }
      }
    }
  }
}

void gemm_small(const Operand& a, const Operand& b, Index m, Index n, Index k, double alpha,
                double* c, Index ldc) {
  for (Index j = 0; j < n; ++j) {
    double* cj = c + j * ldc;
    for (Index p = 0; p < k; ++p) {
      const double bpj = alpha * b.at(p, j);
      if (!a.transposed) {
        const double* ap = a.data + p * a.ld;
        for (Index i = 0; i < m; ++i) cj[i] += ap[i] * bpj;
      } else {
        for (Index i = 0; i < m; ++i) cj[i] += a.at(i, p) * bpj;
      }
    }
  }
}

}  // namespace

void gemm(Transpose transpose_a, Transpose transpose_b, Index m, Index n, Index k, double alpha,
          const double* a, Index lda, const double* b, Index ldb, double beta, double* c, Index ldc,
          int threads) {
  if (m == 0 || n == 0) return;
  for (Index j = 0; j < n; ++j) {
    double* cj = c + j * ldc;
    if (beta == 0.0) {
      std::fill(cj, cj + m, 0.0);
    } else if (beta != 1.0) {
      for (Index i = 0; i < m; ++i) cj[i] *= beta;
    }
  }
  if (k == 0 || alpha == 0.0) return;

  const Operand opa{a, lda, transpose_a == Transpose::Yes};
  const Operand opb{b, ldb, transpose_b == Transpose::Yes};

  if (m * n * k <= kSmallProduct) {
    gemm_small(opa, opb, m, n, k, alpha, c, ldc);
    return;
  }

  const Index panels = (n + kNr - 1) / kNr;
  const Index workers = std::clamp<Index>(threads, 1, panels);
  if (workers == 1) {
    gemm_blocked(opa, opb, m, n, k, alpha, c, ldc);
    return;
  }

  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    const Index first = (panels * w / workers) * kNr;
    const Index last = std::min(n, (panels * (w + 1) / workers) * kNr);
    if (first >= last) continue;
    pool.emplace_back([=] {
      const Operand sub_b{opb.transposed ? b + first : b + first * ldb, ldb, opb.transposed};
      gemm_blocked(opa, sub_b, m, last - first, k, alpha, c + first * ldc, ldc);
    });
  }
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b, Transpose transpose_a,
                   Transpose transpose_b, int threads) {
  const bool ta = transpose_a == Transpose::Yes;
  const bool tb = transpose_b == Transpose::Yes;
  const Index m = ta ? a.cols() : a.rows();
  const Index k = ta ? a.rows() : a.cols();
  const Index kb = tb ? b.cols() : b.rows();
  const Index n = tb ? b.rows() : b.cols();
  if (k != kb) {
    throw ShapeError("matmul: inner dimensions disagree for " + a.shape() + (ta ? "ᵀ" : "") +
                     " times " + b.shape() + (tb ? "ᵀ" : ""));
  }
  DenseMatrix c(m, n);
  gemm(transpose_a, transpose_b, m, n, k, 1.0, a.data(), std::max<Index>(a.rows(), 1), b.data(),
       std::max<Index>(b.rows(), 1), 0.0, c.data(), std::max<Index>(m, 1), threads);
  return c;
}

}  // namespace rqlp
