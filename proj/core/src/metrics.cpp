#include "rqlp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "rqlp/error.hpp"

namespace rqlp {

namespace {

constexpr double kOrthonormalityTol = 1e-8;
constexpr double kCurveNormTol = 1e-8;

void require_orthonormal(const DenseMatrix& x, const char* name) {
  const double defect = orthonormality_defect(x);
  if (defect > kOrthonormalityTol) {
    throw InputError(std::string("subspace_distance: ") + name +
                     " does not have orthonormal columns (defect " + std::to_string(defect) + ")");
  }
}

}  // namespace

double subspace_distance(const DenseMatrix& x, const DenseMatrix& y) {
  if (x.rows() != y.rows()) {
    throw ShapeError("subspace_distance: row counts differ, " + x.shape() + " vs " + y.shape());
  }
  require_orthonormal(x, "X");
  require_orthonormal(y, "Y");
  if (y.cols() == 0) return 0.0;
  const DenseMatrix xty = matmul(x, y, Transpose::Yes, Transpose::No);
  DenseMatrix residual = y - matmul(x, xty);
  const double s = singular_values(residual).front();
  return std::clamp(s, 0.0, 1.0);
}

double relative_error(double reference, double estimate) {
  if (reference == 0.0) return estimate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(estimate - reference) / std::abs(reference);
}

std::vector<SvComparison> sv_compare(const std::vector<double>& reference,
                                     const std::vector<NamedEstimate>& estimates) {
  for (const auto& e : estimates) {
    if (e.values.size() != reference.size()) {
      throw ParameterError("sv_compare: estimate '" + e.name + "' has length " +
                           std::to_string(e.values.size()) + ", reference has " +
                           std::to_string(reference.size()));
    }
  }
  std::vector<SvComparison> rows;
  rows.reserve(reference.size() * estimates.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    for (const auto& e : estimates) {
      rows.push_back({static_cast<Index>(i + 1), e.name, reference[i], e.values[i],
                      relative_error(reference[i], e.values[i])});
    }
  }
  return rows;
}

void write_sv_csv(std::ostream& out, const std::vector<SvComparison>& rows) {
  std::vector<std::string> algs;
  for (const auto& r : rows) {
    if (std::find(algs.begin(), algs.end(), r.algorithm) != algs.end()) break;
    algs.push_back(r.algorithm);
  }
  out << "i,sigma_ref";
  for (const auto& a : algs) out << ",sigma_" << a;
  for (const auto& a : algs) out << ",relerr_" << a;
  out << '\n';
  out << std::setprecision(17);
  const std::size_t width = algs.empty() ? 1 : algs.size();
  for (std::size_t start = 0; start < rows.size(); start += width) {
    out << rows[start].index << ',' << rows[start].reference;
    for (std::size_t a = 0; a < width; ++a) out << ',' << rows[start + a].estimate;
    for (std::size_t a = 0; a < width; ++a) out << ',' << rows[start + a].relative_error;
    out << '\n';
  }
}

double optimal_frobenius_error(const std::vector<double>& sigma, Index k) {
  double ss = 0.0;
  // Smallest first so tiny tails are not absorbed.
  for (auto i = static_cast<Index>(sigma.size()) - 1; i >= k; --i) {
    const double s = sigma[static_cast<std::size_t>(i)];
    ss += s * s;
  }
  return std::sqrt(ss);
}

ApproxErrorCurve lowrank_error_curve(const DenseMatrix& a,
                                     const std::function<DenseMatrix(Index)>& approximant,
                                     const std::vector<Index>& ks, const std::vector<double>& oracle_sigma) {
  const auto n = static_cast<Index>(oracle_sigma.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1 || ks[i] > n) {
      throw ParameterError("lowrank_error_curve: k = " + std::to_string(ks[i]) + " outside [1, " +
                           std::to_string(n) + "]");
    }
    if (i > 0 && ks[i] <= ks[i - 1]) throw ParameterError("lowrank_error_curve: ks must be strictly increasing");
  }
  ApproxErrorCurve curve;
  curve.ks = ks;
  for (Index k : ks) {
    const DenseMatrix residual = a - approximant(k);
    curve.frobenius.push_back(frobenius_norm(residual));
    curve.spectral.push_back(spectral_norm(residual, kCurveNormTol).value);
    curve.optimal_frobenius.push_back(optimal_frobenius_error(oracle_sigma, k));
    curve.optimal_spectral.push_back(k < n ? oracle_sigma[static_cast<std::size_t>(k)] : 0.0);
  }
  return curve;
}

ApproxErrorCurve lowrank_error_curve(const DenseMatrix& a, const QlpFactors& factors,
                                     const std::vector<Index>& ks, const SvdFactors& oracle) {
  if (factors.cols() != static_cast<Index>(oracle.sigma.size())) {
    throw ShapeError("lowrank_error_curve: factor and oracle sizes differ");
  }
  return lowrank_error_curve(
      a, [&](Index k) { return rank_k_approx(factors, k); }, ks, oracle.sigma);
}

void write_curve_csv(std::ostream& out, const ApproxErrorCurve& curve) {
  out << "k,frob,frob_opt,spec,spec_opt\n" << std::setprecision(17);
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    out << curve.ks[i] << ',' << curve.frobenius[i] << ',' << curve.optimal_frobenius[i] << ','
        << curve.spectral[i] << ',' << curve.optimal_spectral[i] << '\n';
  }
}

}  // namespace rqlp
