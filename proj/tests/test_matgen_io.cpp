#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "rqlp/binary_io.hpp"
#include "rqlp/error.hpp"
#include "rqlp/matgen.hpp"
#include "support.hpp"

using namespace rqlp;
using rqlp::test::orthonormality_tol;

namespace {

double max_relative_error(const std::vector<double>& ref, const std::vector<double>& got) {
  double worst = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    worst = std::max(worst, std::abs(got[i] - ref[i]) / ref[i]);
  }
  return worst;
}

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("fast decay is i^-2") {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::FastDecay;
    spec.n = 4;
    const std::vector<double> s = spec.singular_values();
    CHECK(s[0] == 1.0);
    CHECK(s[1] == 0.25);
    CHECK(s[2] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(s[3] == 0.0625);
  }

  TEST_CASE("noisy low rank ramp and tail") {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::NoisyLowRank;
    spec.n = 10;
    spec.k = 4;
    spec.ramp_end = 0.25;
    const std::vector<double> s = spec.singular_values();
    CHECK(s[0] == 1.0);
    CHECK(s[1] == doctest::Approx(0.75));
    CHECK(s[3] == doctest::Approx(0.25));
    for (std::size_t i = 4; i < s.size(); ++i) CHECK(s[i] == 0.0);
  }

  TEST_CASE("s-shaped levels out at the floor") {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::SShaped;
    spec.n = 1000;
    const std::vector<double> s = spec.singular_values();
    CHECK(s.front() <= 1.0 + 1e-9);
    CHECK(s.back() == doctest::Approx(0.01).epsilon(0.1));
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] <= s[i - 1]);
  }

  TEST_CASE("linear ramp endpoints") {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::Linear;
    spec.n = 5;
    spec.ramp_end = 0.2;
    const std::vector<double> s = spec.singular_values();
    CHECK(s.front() == 1.0);
    CHECK(s.back() == doctest::Approx(0.2));
    CHECK(s[2] == doctest::Approx(0.6));
  }

  TEST_CASE("invalid combinations") {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::NoisyLowRank;
    spec.n = 10;
    spec.k = 10;
    CHECK_THROWS_AS(spec.validate(), ParameterError);
    spec.k = 0;
    CHECK_THROWS_AS(spec.validate(), ParameterError);
    spec.k = 3;
    CHECK_NOTHROW(spec.validate());
    spec.noise_level = -1.0;
    CHECK_THROWS_AS(spec.validate(), ParameterError);
    spec.noise_level = 0.05;
    spec.m = 5;
    CHECK_THROWS_AS(spec.validate(), ParameterError);

    SpectrumSpec custom;
    custom.kind = SpectrumKind::Custom;
    custom.n = 3;
    custom.values = {1, 2, 0};
    CHECK_THROWS_AS(custom.validate(), ParameterError);
    custom.values = {1, 0.5};
    CHECK_THROWS_AS(custom.validate(), ParameterError);
    custom.values = {1, 0.5, 0};
    CHECK_NOTHROW(custom.validate());

    SpectrumSpec tiny;
    tiny.n = 1;
    CHECK_THROWS_AS(build(tiny, 1), ParameterError);
  }

  TEST_CASE("names round trip") {
    for (auto kind : {SpectrumKind::NoisyLowRank, SpectrumKind::FastDecay, SpectrumKind::SShaped,
                      SpectrumKind::Linear, SpectrumKind::Custom}) {
      CHECK(parse_spectrum_kind(to_string(kind)) == kind);
    }
    for (auto mode : {NoiseNormalization::Spectral, NoiseNormalization::Entry, NoiseNormalization::Column}) {
      CHECK(parse_noise_normalization(to_string(mode)) == mode);
    }
    CHECK_THROWS_AS(parse_spectrum_kind("gaussian"), ParameterError);
  }

  TEST_CASE("JSON round trip") {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::NoisyLowRank;
    spec.n = 40;
    spec.m = 55;
    spec.k = 7;
    spec.noise_level = 0.1;
    spec.normalization = NoiseNormalization::Column;
    const SpectrumSpec back = SpectrumSpec::from_json(spec.to_json());
    CHECK(back.to_json() == spec.to_json());
    CHECK(back.rows() == 55);

    SpectrumSpec custom;
    custom.kind = SpectrumKind::Custom;
    custom.n = 3;
    custom.values = {2, 1, 0.5};
    CHECK(SpectrumSpec::from_json(custom.to_json()).values == custom.values);

    CHECK(SpectrumSpec::from_json(R"({"kind": "fast-decay", "n": 12})").n == 12);
    CHECK_THROWS_AS(SpectrumSpec::from_json("{"), ParseError);
    CHECK_THROWS_AS(SpectrumSpec::from_json("[1]"), ParseError);
    CHECK_THROWS_AS(SpectrumSpec::from_json(R"({"n": 12})"), ParseError);
    CHECK_THROWS_AS(SpectrumSpec::from_json(R"({"kind": "fast-decay", "n": 1})"), ParameterError);
  }
}

TEST_SUITE("random_orthogonal") {
  TEST_CASE("n = 1 is [[1]]") {
    GaussianStream s(3);
    const DenseMatrix q = random_orthogonal(s, 1);
    CHECK(q(0, 0) == 1.0);
  }

  TEST_CASE("orthogonal, deterministic and seed sensitive") {
    GaussianStream s1(4);
    GaussianStream s2(4);
    GaussianStream s3(5);
    const DenseMatrix a = random_orthogonal(s1, 30);
    CHECK(orthonormality_defect(a) <= orthonormality_tol(30));
    CHECK(orthonormality_defect(a.transpose()) <= orthonormality_tol(30));
    CHECK(a == random_orthogonal(s2, 30));
    CHECK(max_abs_diff(a, random_orthogonal(s3, 30)) > 0.1);
  }
}

TEST_SUITE("build") {
  TEST_CASE("noiseless constructions reproduce their spectrum") {
    for (auto kind : {SpectrumKind::NoisyLowRank, SpectrumKind::FastDecay, SpectrumKind::SShaped,
                      SpectrumKind::Linear}) {
      CAPTURE(to_string(kind));
      SpectrumSpec spec;
      spec.kind = kind;
      spec.n = 60;
      spec.k = 12;
      spec.noise_level = 0.0;
      const TestMatrix t = build(spec, 11);
      CHECK(t.sigma_true == spec.singular_values());
      const std::vector<double> s = singular_values(t.a);
      const Index rank = kind == SpectrumKind::NoisyLowRank ? 12 : 60;
      const std::vector<double> head(t.sigma_true.begin(), t.sigma_true.begin() + rank);
      CHECK(max_relative_error(head, s) <= 1e-10);
      for (Index i = rank; i < 60; ++i) CHECK(s[static_cast<std::size_t>(i)] <= 1e-14);
    }
  }

  TEST_CASE("factors are orthonormal and tall shapes work") {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::FastDecay;
    spec.n = 20;
    spec.m = 35;
    const TestMatrix t = build(spec, 12);
    CHECK(t.a.rows() == 35);
    CHECK(t.a.cols() == 20);
    CHECK(t.u_true.rows() == 35);
    CHECK(t.u_true.cols() == 20);
    CHECK(orthonormality_defect(t.u_true) <= orthonormality_tol(35));
    CHECK(orthonormality_defect(t.v_true) <= orthonormality_tol(20));
    CHECK(t.seed == 12);
  }

  TEST_CASE("deterministic per seed") {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::NoisyLowRank;
    spec.n = 50;
    spec.k = 10;
    CHECK(build(spec, 3).a == build(spec, 3).a);
    CHECK(max_abs_diff(build(spec, 3).a, build(spec, 4).a) > 1e-3);
  }

  TEST_CASE("independent of a sketch stream with the same seed") {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::FastDecay;
    spec.n = 10;
    const TestMatrix t = build(spec, 7);
    GaussianStream s(7);
    CHECK(max_abs_diff(t.u_true, random_orthogonal(s, 10)) > 0.1);
  }

  TEST_CASE("noise normalizations scale as documented") {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::NoisyLowRank;
    spec.n = 100;
    spec.k = 10;
    spec.noise_level = 1.0;
    spec.ramp_end = 1.0;  // σ_k = 1, so A's tail is the raw noise
    spec.normalization = NoiseNormalization::Spectral;
    const std::vector<double> spectral = singular_values(build(spec, 5).a);
    // The tail is the noise projected away from the signal; its top is
    // close to ‖N‖₂ ≈ 1.
    CHECK(spectral[10] == doctest::Approx(1.0).epsilon(0.2));

    spec.normalization = NoiseNormalization::Column;
    const DenseMatrix col = build(spec, 5).a;
    const std::vector<double> column = singular_values(col);
    CHECK(column[10] == doctest::Approx(2.0).epsilon(0.2));

    spec.normalization = NoiseNormalization::Entry;
    const std::vector<double> entry = singular_values(build(spec, 5).a);
    CHECK(entry[10] == doctest::Approx(20.0).epsilon(0.2));
  }

  TEST_CASE("noisy low rank at n = 300, k = 60 shows a gap on every seed") {
    SpectrumSpec spec;
    spec.kind = SpectrumKind::NoisyLowRank;
    spec.n = 300;
    spec.k = 60;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      CAPTURE(seed);
      const std::vector<double> s = singular_values(build(spec, seed).a);
      CHECK(s[59] / s[60] >= 5.0);
    }
  }
}

TEST_SUITE("matrix market") {
  TEST_CASE("two-entry coordinate file") {
    const DenseMatrix a = matrix_market_parse(
        "%%MatrixMarket matrix coordinate real general\n"
        "% a comment\n"
        "2 2 2\n"
        "1 1 3.0\n"
        "2 2 4.0\n");
    CHECK(a == DenseMatrix::from_rows({{3, 0}, {0, 4}}));
  }

  TEST_CASE("duplicates are summed") {
    const DenseMatrix a = matrix_market_parse(
        "%%MatrixMarket matrix coordinate real general\n2 3 3\n1 1 1.0\n1 1 2.0\n2 3 -1.5e0\n");
    CHECK(a(0, 0) == 3.0);
    CHECK(a(1, 2) == -1.5);
  }

  TEST_CASE("symmetric storage mirrors the lower triangle") {
    const DenseMatrix a = matrix_market_parse(
        "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 2\n3 1 5\n2 2 7\n");
    CHECK(a == DenseMatrix::from_rows({{2, 0, 5}, {0, 7, 0}, {5, 0, 0}}));
  }

  TEST_CASE("array format is column-major") {
    const DenseMatrix a = matrix_market_parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
    CHECK(a == DenseMatrix::from_rows({{1, 3}, {2, 4}}));
  }

  TEST_CASE("integer field and case-insensitive banner") {
    const DenseMatrix a = matrix_market_parse("%%MatrixMarket MATRIX Coordinate Integer General\n1 2 1\n1 2 7\n");
    CHECK(a(0, 1) == 7.0);
  }

  TEST_CASE("rejected inputs name the offending line") {
    auto line_of = [](const std::string& text) {
      try {
        matrix_market_parse(text);
      } catch (const ParseError& e) {
        return e.line();
      }
      return std::size_t{0};
    };
    CHECK(line_of("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n") == 1);
    CHECK(line_of("%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1 0\n") == 1);
    CHECK(line_of("%%MatrixMarket matrix coordinate real hermitian\n2 2 1\n1 1 1\n") == 1);
    CHECK(line_of("not a header\n") == 1);
    CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n") == 3);
    CHECK(line_of("%%MatrixMarket matrix coordinate real general\n%\n2 2 2\n1 1 1.0\n1 x 2.0\n") == 5);
    CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 2\n") == 2);
    CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 nan\n") == 3);
    CHECK(line_of("%%MatrixMarket matrix coordinate real symmetric\n2 3 1\n1 1 1\n") == 2);
    CHECK(line_of("%%MatrixMarket matrix array real general\n2 1\n1\n2\n3\n") == 5);
    CHECK_THROWS_AS(matrix_market_parse("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n"),
                    ParseError);
    CHECK_THROWS_AS(matrix_market_parse(""), ParseError);
  }

  TEST_CASE("dense size over the cap is refused before allocation") {
    CHECK_THROWS_AS(matrix_market_parse("%%MatrixMarket matrix coordinate real general\n100000 100000 0\n"),
                    CapacityError);
    CHECK_THROWS_AS(matrix_market_parse("%%MatrixMarket matrix coordinate real general\n10 10 0\n", 799),
                    CapacityError);
    CHECK_NOTHROW(matrix_market_parse("%%MatrixMarket matrix coordinate real general\n10 10 0\n", 800));
  }

  TEST_CASE("reading from a file") {
    rqlp::test::TempDir dir;
    rqlp::test::write_file(dir / "a.mtx", "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2.5\n");
    CHECK(matrix_market_read(dir / "a.mtx")(0, 0) == 2.5);
    CHECK_THROWS_AS(matrix_market_read(dir / "missing.mtx"), IoError);
  }
}

TEST_SUITE("binary io") {
  TEST_CASE("round trip is exact") {
    const DenseMatrix a = rqlp::test::gaussian(7, 4, 13);
    std::stringstream buf;
    write_binary(buf, a);
    CHECK(buf.str().size() == kBinaryHeaderBytes + 7 * 4 * sizeof(double));
    CHECK(read_binary(buf) == a);
  }

  TEST_CASE("header layout") {
    const DenseMatrix a = DenseMatrix::from_rows({{1, 2, 3}});
    std::stringstream buf;
    write_binary(buf, a);
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 4) == "RQLP");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);   // rows, little-endian
    CHECK(static_cast<unsigned char>(bytes[12]) == 3);  // cols
    double second = 0.0;
    std::memcpy(&second, bytes.data() + kBinaryHeaderBytes + sizeof(double), sizeof second);
    CHECK(second == 2.0);
  }

  TEST_CASE("malformed files") {
    const DenseMatrix a = rqlp::test::gaussian(3, 3, 14);
    std::stringstream good;
    write_binary(good, a);
    const std::string bytes = good.str();

    std::stringstream magic("RQLX" + bytes.substr(4));
    CHECK_THROWS_AS(read_binary(magic), ParseError);
    std::stringstream header(bytes.substr(0, 10));
    CHECK_THROWS_AS(read_binary(header), ParseError);
    std::stringstream payload(bytes.substr(0, bytes.size() - 1));
    CHECK_THROWS_AS(read_binary(payload), ParseError);
    std::stringstream trailing(bytes + "x");
    CHECK_THROWS_AS(read_binary(trailing), ParseError);
    std::stringstream capped(bytes);
    CHECK_THROWS_AS(read_binary(capped, 71), CapacityError);
  }

  TEST_CASE("files") {
    rqlp::test::TempDir dir;
    const DenseMatrix a = rqlp::test::gaussian(5, 2, 15);
    write_binary_file(dir / "a.bin", a);
    CHECK(read_binary_file(dir / "a.bin") == a);
    CHECK_THROWS_AS(read_binary_file(dir / "none.bin"), IoError);
    CHECK_THROWS_AS(write_binary_file(dir / "no" / "such" / "a.bin", a), IoError);
  }
}
