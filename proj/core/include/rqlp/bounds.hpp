#pragma once

#include <array>
#include <string>
#include <vector>

#include "rqlp/decompositions.hpp"
#include "rqlp/kernels.hpp"
#include "rqlp/matrix.hpp"

namespace rqlp {

/// The rotated sketch Ω̃ = UᵀΩ₁ split after row k, and the quantity
/// ‖Ω̃₂·Ω̃₁⁻¹‖₂ that drives every bound.
struct OmegaSplit {
  DenseMatrix omega1_tilde;  ///< k×k
  DenseMatrix omega2_tilde;  ///< (n−k)×k
  double ratio_norm = 0.0;
};

/// Builds the split from explicit sketch columns Ω₁ (m×k) and the left
/// singular vectors U (m×n, orthonormal). Requires 1 ≤ k < n.
/// Throws SingularSketchError when cond(Ω̃₁) > 1e14.
OmegaSplit omega_split(const DenseMatrix& omega1, const DenseMatrix& u);

/// Regenerates Ω₁ (first k sketch columns) from the sketch origin.
OmegaSplit omega_split(const SketchOrigin& origin, Index k, const DenseMatrix& u);

/// ‖Ω̃₂·Ω̃₁⁻¹‖₂ via a QR-based solve against Ω̃₁.
double sketch_ratio_norm(const DenseMatrix& omega1_tilde, const DenseMatrix& omega2_tilde);

enum class Angle { ThetaQ = 0, ThetaP = 1, PhiQ = 2, PhiP = 3 };
inline constexpr std::array<const char*, 4> kAngleNames = {"theta_q", "theta_p", "phi_q", "phi_p"};

/// Evaluated right-hand sides of the rank-revealing bounds next to the
/// measured left-hand sides, for one factorization and split index k.
struct BoundReport {
  Index k = 0;
  double ratio_norm = 0.0;
  std::vector<double> sigma;         ///< σ₁..σ_k from the oracle
  double sigma_k_plus_1 = 0.0;
  std::vector<double> psi;           ///< ψᵢ = σ_{k+1}/σᵢ, i ≤ k
  std::vector<double> sv_lower;      ///< σᵢ/√(1 + ψᵢ⁴·r²)
  std::vector<double> sv_measured;   ///< σᵢ(L₁₁) = σᵢ(Q₁ᵀA)
  std::vector<double> diag_measured; ///< i-th largest |diag(L)|
  double l22_bound = 0.0;
  double l22_measured = 0.0;
  double sigma_k_l11 = 0.0;          ///< σ_k(L₁₁)
  bool applicable_phi = false;       ///< ‖L₂₂‖₂ < σ_k(L₁₁)
  std::array<double, 4> angle_bounds{};
  std::array<double, 4> angle_measured{};
  std::array<bool, 4> angle_vacuous{};
  /// dist(range(U_⊥), range(Q₂)); equals sin θ_Q whenever m = n.
  double phi_q_complement = 0.0;
  bool angles_evaluated = false;

  /// Violations counted at the report's tolerance.
  int sv_upper_violations = 0;
  int sv_lower_violations = 0;
  int l22_violations = 0;
  int angle_violations = 0;
  /// Sandwich violations of the diagonal-entry reading of σ̂: sorted
  /// |diag(L)|, and |diag(L)| in factor order. Logged only; the inequality
  /// is established for σᵢ(L₁₁), which differs from the diagonal of a
  /// non-diagonal triangular block.
  int diag_violations = 0;
  int raw_order_violations = 0;

  int violations() const noexcept {
    return sv_upper_violations + sv_lower_violations + l22_violations + angle_violations;
  }
};

struct BoundOptions {
  /// Relative slack for every inequality.
  double tol = 1e-10;
};

/// Fills the σ̂ sandwich (σ̂ᵢ = σᵢ(L₁₁)) and the ‖L₂₂‖₂ bound. `svd` must be
/// an exact (oracle or constructed) SVD of `a`. Throws NotApplicableError
/// for factorizations without a sketch, and ParameterError unless 1 ≤ k < n
/// and σ_k > 0.
BoundReport check_theorem1(const DenseMatrix& a, const QlpFactors& f, const SvdFactors& svd, Index k,
                           const BoundOptions& options = {});

/// check_theorem1 plus the four canonical-angle bounds. The measured sines
/// are dist(U_k, Q₁), dist(V_k, P₁), dist(V_⊥, P₂), and for φ_Q the
/// distance between range(U_k) and the column space of the rank-k
/// truncation Q·[L₁₁; L₂₁]. φ bounds are only enforced when
/// ‖L₂₂‖₂ < σ_k(L₁₁).
BoundReport check_theorem2(const DenseMatrix& a, const QlpFactors& f, const SvdFactors& svd, Index k,
                           const BoundOptions& options = {});

/// Stable JSON encoding of a report.
std::string to_json(const BoundReport& report, int indent = 2);

}  // namespace rqlp
