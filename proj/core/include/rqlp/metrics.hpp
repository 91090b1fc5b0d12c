#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rqlp/decompositions.hpp"
#include "rqlp/kernels.hpp"
#include "rqlp/matrix.hpp"

namespace rqlp {

/// sin of the largest canonical angle between range(X) and range(Y), i.e.
/// the largest singular value of Y − X·(XᵀY). Both inputs must have
/// orthonormal columns (‖XᵀX − I‖_max ≤ 1e−8) and equal row counts.
/// The result is clamped to [0, 1].
double subspace_distance(const DenseMatrix& x, const DenseMatrix& y);

/// |σ̂ − σ|/σ, with 0/0 = 0 and x/0 = ∞ for x > 0.
double relative_error(double reference, double estimate);

struct SvComparison {
  Index index = 0;  ///< 1-based
  std::string algorithm;
  double reference = 0.0;
  double estimate = 0.0;
  double relative_error = 0.0;
};

struct NamedEstimate {
  std::string name;
  std::vector<double> values;  ///< sorted nonincreasing
};

/// Rows ordered by index, then by algorithm in the order given.
std::vector<SvComparison> sv_compare(const std::vector<double>& reference,
                                     const std::vector<NamedEstimate>& estimates);
inline std::vector<SvComparison> sv_compare(const SvdFactors& oracle,
                                            const std::vector<NamedEstimate>& estimates) {
  return sv_compare(oracle.sigma, estimates);
}

/// CSV with header i,sigma_ref,sigma_<alg>...,relerr_<alg>...
void write_sv_csv(std::ostream& out, const std::vector<SvComparison>& rows);

struct ApproxErrorCurve {
  std::vector<Index> ks;
  std::vector<double> frobenius;
  std::vector<double> spectral;
  std::vector<double> optimal_frobenius;
  std::vector<double> optimal_spectral;
};

/// ‖A − Âₖ‖ in both norms for every k, next to the Eckart–Young optima
/// √(Σ_{i>k} σᵢ²) and σ_{k+1} from the oracle. ks must be strictly
/// increasing within [1, n].
ApproxErrorCurve lowrank_error_curve(const DenseMatrix& a, const QlpFactors& factors,
                                     const std::vector<Index>& ks, const SvdFactors& oracle);
ApproxErrorCurve lowrank_error_curve(const DenseMatrix& a,
                                     const std::function<DenseMatrix(Index)>& approximant,
                                     const std::vector<Index>& ks, const std::vector<double>& oracle_sigma);

/// Eckart–Young optimal Frobenius error of a rank-k approximation.
double optimal_frobenius_error(const std::vector<double>& sigma, Index k);

/// CSV with header k,frob,frob_opt,spec,spec_opt
void write_curve_csv(std::ostream& out, const ApproxErrorCurve& curve);

}  // namespace rqlp
