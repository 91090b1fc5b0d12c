#include "rqlp/matgen.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "rqlp/error.hpp"
#include "rqlp/kernels.hpp"

namespace rqlp {

using nlohmann::json;

namespace {
constexpr std::uint64_t kMatgenStreamKey = 0x6d617467656e5f31ULL;  // "matgen_1"
}  // namespace

std::string_view to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::NoisyLowRank: return "noisy-low-rank";
    case SpectrumKind::FastDecay: return "fast-decay";
    case SpectrumKind::SShaped: return "s-shaped";
    case SpectrumKind::Linear: return "linear";
    case SpectrumKind::Custom: return "custom";
  }
  return "unknown";
}

std::string_view to_string(NoiseNormalization mode) {
  switch (mode) {
    case NoiseNormalization::Spectral: return "spectral";
    case NoiseNormalization::Entry: return "entry";
    case NoiseNormalization::Column: return "column";
  }
  return "unknown";
}

SpectrumKind parse_spectrum_kind(std::string_view name) {
  for (auto kind : {SpectrumKind::NoisyLowRank, SpectrumKind::FastDecay, SpectrumKind::SShaped,
                    SpectrumKind::Linear, SpectrumKind::Custom}) {
    if (name == to_string(kind)) return kind;
  }
  throw ParameterError("unknown spectrum kind '" + std::string(name) + "'");
}

NoiseNormalization parse_noise_normalization(std::string_view name) {
  for (auto mode : {NoiseNormalization::Spectral, NoiseNormalization::Entry, NoiseNormalization::Column}) {
    if (name == to_string(mode)) return mode;
  }
  throw ParameterError("unknown noise normalization '" + std::string(name) + "'");
}

void SpectrumSpec::validate() const {
  auto fail = [](const std::string& msg) { throw ParameterError("spectrum spec: " + msg); };
  if (n < 2) fail("n must be at least 2");
  if (m != 0 && m < n) fail("rows must be >= n");
  if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) fail("noise_level must be finite and >= 0");
  switch (kind) {
    case SpectrumKind::NoisyLowRank:
      if (k < 1 || k >= n) fail("noisy-low-rank needs 1 <= k < n");
      if (!(ramp_start >= ramp_end && ramp_end > 0.0)) fail("ramp needs ramp_start >= ramp_end > 0");
      break;
    case SpectrumKind::SShaped:
      if (!(floor > 0.0 && floor < 1.0)) fail("s-shaped floor must lie in (0, 1)");
      if (steepness < 0.0) fail("steepness must be >= 0");
      break;
    case SpectrumKind::Linear:
      if (!(ramp_start >= ramp_end && ramp_end >= 0.0)) fail("ramp needs ramp_start >= ramp_end >= 0");
      break;
    case SpectrumKind::Custom:
      if (static_cast<Index>(values.size()) != n) fail("custom values must have length n");
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0) || !std::isfinite(values[i])) fail("custom values must be finite and >= 0");
        if (i > 0 && values[i] > values[i - 1]) fail("custom values must be nonincreasing");
      }
      break;
    case SpectrumKind::FastDecay:
      break;
  }
}

std::vector<double> SpectrumSpec::singular_values() const {
  validate();
  std::vector<double> s(static_cast<std::size_t>(n), 0.0);
  switch (kind) {
    case SpectrumKind::NoisyLowRank:
      for (Index i = 0; i < k; ++i) {
        const double t = k == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(k - 1);
        s[static_cast<std::size_t>(i)] = ramp_start + (ramp_end - ramp_start) * t;
      }
      break;
    case SpectrumKind::FastDecay:
      for (Index i = 0; i < n; ++i) {
        const double idx = static_cast<double>(i + 1);
        s[static_cast<std::size_t>(i)] = 1.0 / (idx * idx);
      }
      break;
    case SpectrumKind::SShaped: {
      const double steep = steepness > 0.0 ? steepness : 20.0 / static_cast<double>(n);
      const double mid = midpoint > 0.0 ? midpoint : static_cast<double>(n) / 2.0;
      for (Index i = 0; i < n; ++i) {
        const double x = steep * (static_cast<double>(i + 1) - mid);
        s[static_cast<std::size_t>(i)] = floor + (1.0 - floor) / (1.0 + std::exp(x));
      }
      break;
    }
    case SpectrumKind::Linear:
      for (Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        s[static_cast<std::size_t>(i)] = ramp_start + (ramp_end - ramp_start) * t;
      }
      break;
    case SpectrumKind::Custom:
      s = values;
      break;
  }
  return s;
}

std::string SpectrumSpec::to_json() const {
  json j;
  j["kind"] = std::string(to_string(kind));
  j["n"] = n;
  j["m"] = rows();
  j["k"] = k;
  j["noise_level"] = noise_level;
  j["normalization"] = std::string(to_string(normalization));
  j["ramp_start"] = ramp_start;
  j["ramp_end"] = ramp_end;
  j["floor"] = floor;
  j["steepness"] = steepness;
  j["midpoint"] = midpoint;
  if (kind == SpectrumKind::Custom) j["values"] = values;
  return j.dump(2);
}

SpectrumSpec SpectrumSpec::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("spectrum spec JSON: ") + e.what(), 0);
  }
  if (!j.is_object()) throw ParseError("spectrum spec JSON must be an object", 0);
  SpectrumSpec spec;
  try {
    spec.kind = parse_spectrum_kind(j.at("kind").get<std::string>());
    spec.n = j.at("n").get<Index>();
    spec.m = j.value("m", Index{0});
    if (spec.m == spec.n) spec.m = 0;
    spec.k = j.value("k", Index{0});
    spec.noise_level = j.value("noise_level", spec.noise_level);
    spec.normalization = parse_noise_normalization(j.value("normalization", std::string("spectral")));
    spec.ramp_start = j.value("ramp_start", spec.ramp_start);
    spec.ramp_end = j.value("ramp_end", spec.ramp_end);
    spec.floor = j.value("floor", spec.floor);
    spec.steepness = j.value("steepness", spec.steepness);
    spec.midpoint = j.value("midpoint", spec.midpoint);
    if (j.contains("values")) spec.values = j.at("values").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("spectrum spec JSON: ") + e.what(), 0);
  }
  spec.validate();
  return spec;
}

DenseMatrix random_orthogonal(GaussianStream& stream, Index n) {
  if (n < 1) throw ParameterError("random_orthogonal needs n >= 1");
  return qr(gaussian_matrix(stream, n, n)).q;
}

TestMatrix build(const SpectrumSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Index m = spec.rows();
  const Index n = spec.n;
  // Separate from sketch streams that callers seed with the same integer.
  GaussianStream stream(seed ^ kMatgenStreamKey);

  TestMatrix t;
  t.spec = spec;
  t.seed = seed;
  t.sigma_true = spec.singular_values();
  const DenseMatrix u_full = random_orthogonal(stream, m);
  t.u_true = m == n ? u_full : u_full.leading_cols(n);
  t.v_true = random_orthogonal(stream, n);

  DenseMatrix us = t.u_true;
  for (Index j = 0; j < n; ++j) {
    const double s = t.sigma_true[static_cast<std::size_t>(j)];
    for (double& x : us.col(j)) x *= s;
  }
  t.a = matmul(us, t.v_true, Transpose::No, Transpose::Yes);

  if (spec.kind == SpectrumKind::NoisyLowRank && spec.noise_level > 0.0) {
    DenseMatrix noise = gaussian_matrix(stream, m, n);
    switch (spec.normalization) {
      case NoiseNormalization::Spectral: {
        const double scale = 1.0 / (std::sqrt(static_cast<double>(m)) + std::sqrt(static_cast<double>(n)));
        for (double& x : noise.values()) x *= scale;
        break;
      }
      case NoiseNormalization::Column:
        for (Index j = 0; j < n; ++j) {
          auto c = noise.col(j);
          double ss = 0.0;
          for (double x : c) ss += x * x;
          const double inv = 1.0 / std::sqrt(ss);
          for (double& x : c) x *= inv;
        }
        break;
      case NoiseNormalization::Entry:
        break;
    }
    const double amplitude = spec.noise_level * t.sigma_true[static_cast<std::size_t>(spec.k - 1)];
    auto dst = t.a.values();
    auto src = noise.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += amplitude * src[i];
  }
  return t;
}

}  // namespace rqlp
