#include "rqlp/bounds.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "rqlp/error.hpp"
#include "rqlp/metrics.hpp"

namespace rqlp {

namespace {

constexpr double kMaxSketchCondition = 1e14;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Solves R·x = b in place for upper triangular R.
void back_substitute(const DenseMatrix& r, std::span<double> b) {
  const Index n = r.rows();
  for (Index i = n - 1; i >= 0; --i) {
    double s = b[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < n; ++j) s -= r(i, j) * b[static_cast<std::size_t>(j)];
    b[static_cast<std::size_t>(i)] = s / r(i, i);
  }
}

double largest_singular_value(const DenseMatrix& a) {
  if (a.empty()) return 0.0;
  return singular_values(a).front();
}

void require_split_index(Index k, Index n) {
  if (k < 1 || k >= n) {
    throw ParameterError("split index k = " + std::to_string(k) + " must satisfy 1 <= k < n = " +
                         std::to_string(n));
  }
}

}  // namespace

double sketch_ratio_norm(const DenseMatrix& omega1_tilde, const DenseMatrix& omega2_tilde) {
  const Index k = omega1_tilde.rows();
  if (omega1_tilde.cols() != k || omega2_tilde.cols() != k) {
    throw ShapeError("sketch_ratio_norm: incompatible blocks " + omega1_tilde.shape() + " and " +
                     omega2_tilde.shape());
  }
  const std::vector<double> s = singular_values(omega1_tilde);
  if (s.back() == 0.0 || s.front() / s.back() > kMaxSketchCondition) {
    throw SingularSketchError("rotated sketch block is numerically singular (condition " +
                              std::to_string(s.back() == 0.0 ? INFINITY : s.front() / s.back()) + ")");
  }
  if (omega2_tilde.rows() == 0) return 0.0;

  // X = Ω̃₂·Ω̃₁⁻¹  ⇔  Ω̃₁ᵀ·Xᵀ = Ω̃₂ᵀ; with Ω̃₁ᵀ = Q·R, Xᵀ = R⁻¹·Qᵀ·Ω̃₂ᵀ.
  const QrFactors f = qr(omega1_tilde.transpose());
  DenseMatrix xt = matmul(f.q, omega2_tilde, Transpose::Yes, Transpose::Yes);
  for (Index j = 0; j < xt.cols(); ++j) back_substitute(f.r, xt.col(j));
  return largest_singular_value(xt);
}

OmegaSplit omega_split(const DenseMatrix& omega1, const DenseMatrix& u) {
  if (omega1.rows() != u.rows()) {
    throw ShapeError("omega_split: sketch " + omega1.shape() + " and U " + u.shape() + " disagree");
  }
  const Index n = u.cols();
  const Index k = omega1.cols();
  require_split_index(k, n);
  const DenseMatrix rotated = matmul(u, omega1, Transpose::Yes, Transpose::No);
  OmegaSplit split{rotated.block(0, 0, k, k), rotated.block(k, 0, n - k, k), 0.0};
  split.ratio_norm = sketch_ratio_norm(split.omega1_tilde, split.omega2_tilde);
  return split;
}

OmegaSplit omega_split(const SketchOrigin& origin, Index k, const DenseMatrix& u) {
  if (origin.rows != u.rows()) {
    throw ShapeError("omega_split: sketch has " + std::to_string(origin.rows) + " rows, U is " + u.shape());
  }
  require_split_index(k, u.cols());
  GaussianStream stream(origin.seed, origin.offset);
  return omega_split(gaussian_matrix(stream, origin.rows, k), u);
}

BoundReport check_theorem1(const DenseMatrix& a, const QlpFactors& f, const SvdFactors& svd, Index k,
                           const BoundOptions& options) {
  if (!f.sketch) {
    throw NotApplicableError("bound checks need a randomized factorization with a recorded sketch seed");
  }
  const Index n = f.cols();
  require_split_index(k, n);
  if (static_cast<Index>(svd.sigma.size()) != n || svd.u.rows() != a.rows() || svd.u.cols() != n) {
    throw ShapeError("check_theorem1: oracle SVD does not match the factorization");
  }
  // ψ_k = σ_{k+1}/σ_k needs σ_k > 0; past the rank, U_k holds arbitrary
  // null-space directions that no bound constrains.
  if (!(svd.sigma[static_cast<std::size_t>(k - 1)] > 0.0)) {
    throw ParameterError("split index k = " + std::to_string(k) + " exceeds the rank (sigma_k = 0)");
  }

  const OmegaSplit split = omega_split(*f.sketch, k, svd.u);
  const double r = split.ratio_norm;
  const double tol = options.tol;
  const double sigma1 = svd.sigma.front();

  BoundReport rep;
  rep.k = k;
  rep.ratio_norm = r;
  rep.sigma.assign(svd.sigma.begin(), svd.sigma.begin() + k);
  rep.sigma_k_plus_1 = svd.sigma[static_cast<std::size_t>(k)];

  const std::vector<double> leading = singular_values(f.l.block(0, 0, k, k));
  const std::vector<double> sorted = f.sorted_diagonal();
  const std::vector<double> raw = f.diagonal();
  auto outside = [tol](double x, double upper, double lower) {
    return x > upper * (1.0 + tol) || x < lower * (1.0 - tol);
  };
  for (Index i = 0; i < k; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double s = svd.sigma[ui];
    const double psi = s > 0.0 ? rep.sigma_k_plus_1 / s : 0.0;
    const double lower = s / std::sqrt(1.0 + psi * psi * psi * psi * r * r);
    rep.psi.push_back(psi);
    rep.sv_lower.push_back(lower);
    rep.sv_measured.push_back(leading[ui]);
    rep.diag_measured.push_back(sorted[ui]);
    if (leading[ui] > s * (1.0 + tol)) ++rep.sv_upper_violations;
    if (leading[ui] < lower * (1.0 - tol)) ++rep.sv_lower_violations;
    if (outside(sorted[ui], s, lower)) ++rep.diag_violations;
    if (outside(std::abs(raw[ui]), s, lower)) ++rep.raw_order_violations;
  }
  rep.sigma_k_l11 = leading.back();

  const double psi_k = rep.psi.back();
  const double psi3r = psi_k * psi_k * psi_k * r;
  rep.l22_bound = rep.sigma_k_plus_1 + psi3r * sigma1 / std::sqrt(1.0 + psi3r * psi3r);
  rep.l22_measured = largest_singular_value(f.l.block(k, k, n - k, n - k));
  const double roundoff = 64.0 * static_cast<double>(n) * kEps;
  if (rep.l22_measured > rep.l22_bound * (1.0 + tol) + roundoff * sigma1) ++rep.l22_violations;
  return rep;
}

BoundReport check_theorem2(const DenseMatrix& a, const QlpFactors& f, const SvdFactors& svd, Index k,
                           const BoundOptions& options) {
  BoundReport rep = check_theorem1(a, f, svd, k, options);
  const Index m = f.rows();
  const Index n = f.cols();
  const double r = rep.ratio_norm;
  const double psi_k = rep.psi.back();

  const double l22 = rep.l22_measured;
  rep.applicable_phi = l22 < rep.sigma_k_l11;

  rep.angle_measured[static_cast<int>(Angle::ThetaQ)] =
      subspace_distance(svd.u.leading_cols(k), f.q.leading_cols(k));
  // Column space of the rank-k truncation Q·[L₁₁; L₂₁]·P₁ᵀ.
  const DenseMatrix truncation_basis = qr(matmul(f.q, f.l.leading_cols(k))).q;
  rep.angle_measured[static_cast<int>(Angle::PhiQ)] =
      subspace_distance(svd.u.leading_cols(k), truncation_basis);
  rep.phi_q_complement = subspace_distance(svd.u.block(0, k, m, n - k), f.q.block(0, k, m, n - k));
  rep.angle_measured[static_cast<int>(Angle::ThetaP)] =
      subspace_distance(svd.v.leading_cols(k), f.p.leading_cols(k));
  rep.angle_measured[static_cast<int>(Angle::PhiP)] =
      subspace_distance(svd.v.block(0, k, n, n - k), f.p.block(0, k, n, n - k));

  constexpr double inf = std::numeric_limits<double>::infinity();
  const double sk = rep.sigma_k_l11;
  rep.angle_bounds[static_cast<int>(Angle::ThetaQ)] = psi_k * psi_k * r;
  rep.angle_bounds[static_cast<int>(Angle::ThetaP)] = psi_k * psi_k * psi_k * r;
  rep.angle_bounds[static_cast<int>(Angle::PhiQ)] = rep.applicable_phi ? l22 * l22 / (sk * sk - l22 * l22) : inf;
  rep.angle_bounds[static_cast<int>(Angle::PhiP)] = rep.applicable_phi ? l22 / sk : inf;

  const double roundoff = 64.0 * static_cast<double>(n) * kEps;
  for (int i = 0; i < 4; ++i) {
    const double bound = rep.angle_bounds[static_cast<std::size_t>(i)];
    rep.angle_vacuous[static_cast<std::size_t>(i)] = bound >= 1.0;
    const bool is_phi = i == static_cast<int>(Angle::PhiQ) || i == static_cast<int>(Angle::PhiP);
    if (is_phi && !rep.applicable_phi) continue;
    if (rep.angle_measured[static_cast<std::size_t>(i)] > bound * (1.0 + options.tol) + roundoff) {
      ++rep.angle_violations;
    }
  }
  rep.angles_evaluated = true;
  return rep;
}

std::string to_json(const BoundReport& report, int indent) {
  using nlohmann::json;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };

  json j;
  j["k"] = report.k;
  j["ratio_norm"] = report.ratio_norm;
  j["sigma"] = report.sigma;
  j["sigma_k_plus_1"] = report.sigma_k_plus_1;
  j["psi"] = report.psi;
  j["sv_lower"] = report.sv_lower;
  j["sv_measured"] = report.sv_measured;
  j["diag_measured"] = report.diag_measured;
  j["l22_bound"] = report.l22_bound;
  j["l22_measured"] = report.l22_measured;
  j["sigma_k_l11"] = report.sigma_k_l11;
  if (report.angles_evaluated) {
    j["applicable_phi"] = report.applicable_phi;
    json angles = json::object();
    for (std::size_t i = 0; i < 4; ++i) {
      angles[kAngleNames[i]] = {{"bound", finite_or_null(report.angle_bounds[i])},
                                {"measured", report.angle_measured[i]},
                                {"vacuous", report.angle_vacuous[i]}};
    }
    j["angles"] = angles;
    j["phi_q_complement"] = report.phi_q_complement;
  }
  j["violations"] = {{"sv_upper", report.sv_upper_violations},
                     {"sv_lower", report.sv_lower_violations},
                     {"l22", report.l22_violations},
                     {"angles", report.angle_violations},
                     {"total", report.violations()}};
  j["diagnostics"] = {{"diag_violations", report.diag_violations},
                      {"raw_order_violations", report.raw_order_violations}};
  return j.dump(indent);
}

}  // namespace rqlp
