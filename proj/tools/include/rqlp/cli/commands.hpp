#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rqlp/error.hpp"
#include "rqlp/matgen.hpp"
#include "rqlp/matrix.hpp"

namespace rqlp::cli {

/// Process exit codes. Scripts may rely on these values.
enum class ExitCode : int { Ok = 0, Runtime = 1, Usage = 2 };

/// Command line misuse detected after parsing (conflicting flags, unknown
/// algorithm names, malformed ranges). Maps to ExitCode::Usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Algorithm { RandQlp, PivotedQlp, Cpqr, Svd };

std::string_view to_string(Algorithm alg);
/// Accepts randqlp, pqlp, cpqr, svd. Throws UsageError otherwise.
Algorithm parse_algorithm(std::string_view name);
/// Comma separated algorithm list; duplicates are dropped, order is kept.
std::vector<Algorithm> parse_algorithms(std::string_view list);

/// "7", "1,4,9" or an inclusive range "0..19".
std::vector<std::uint64_t> parse_seeds(std::string_view text);
/// Byte count with an optional unit: 4096, 512MiB, 2GiB, 1.5GB.
std::uint64_t parse_memory_size(std::string_view text);
/// Comma separated positive sizes, e.g. "200,400,800".
std::vector<Index> parse_sizes(std::string_view text);

/// Where the input matrix comes from. Exactly one of spec_path,
/// matrix_path or inline_spec is set.
struct InputSource {
  std::optional<std::filesystem::path> spec_path;
  std::optional<std::filesystem::path> matrix_path;
  std::optional<SpectrumSpec> inline_spec;
  /// Generator seed for spec inputs. When unset, a spec file written by
  /// gen supplies its own seed; otherwise 1.
  std::optional<std::uint64_t> matrix_seed;
};

struct RunConfig {
  InputSource input;
  /// Generator seeds for gen, sketch seeds otherwise. Empty selects seed 1
  /// (for gen: --matrix-seed or the seed stored in the spec file, else 1).
  std::vector<std::uint64_t> seeds;
  /// Split index for bounds; 0 selects the spec's k.
  Index k = 0;
  std::filesystem::path out;
  std::vector<Algorithm> algorithms;
  int threads = 1;
  std::uint64_t memory_cap = kDefaultMemoryCap;
  bool force = false;
  int repeats = 5;
  std::vector<Index> sizes;
};

/// A loaded input with ground truth when it was generated from a spec.
struct LoadedInput {
  DenseMatrix a;
  std::optional<TestMatrix> truth;
  std::string label;
};

LoadedInput load_input(const InputSource& source, std::uint64_t memory_cap);

/// Writes matrix.bin, sigma.csv and spec.json into config.out (one
/// seed-<s> subdirectory per seed when several seeds are given).
void cmd_gen(const RunConfig& config, std::ostream& log);

struct DecomposeResult {
  Algorithm algorithm = Algorithm::RandQlp;
  double residual = 0.0;
  double seconds = 0.0;
  std::vector<double> estimates;  ///< sorted singular value estimates
};

/// Factors, diag.csv per algorithm under config.out/<alg>/, plus
/// residuals.json and timing.json. Randomized runs use the single
/// seed in config.seeds (1 when empty).
std::vector<DecomposeResult> cmd_decompose(const RunConfig& config, std::ostream& log);

struct SeedOutcome {
  std::uint64_t seed = 0;
  int violations = 0;
  double ratio_norm = 0.0;
  std::string report_json;  ///< empty when `error` is set
  std::string error;
};

struct BoundsSummary {
  Index k = 0;
  Index n = 0;
  std::vector<SeedOutcome> seeds;

  int violations() const;
  int errors() const;
  std::string to_json() const;
};

/// Runs the randomized factorization for every sketch seed and checks all
/// bounds against the oracle SVD of the input. Seeds whose rotated sketch is
/// singular are recorded as errors and the sweep continues.
BoundsSummary cmd_bounds(const RunConfig& config, std::ostream& log);

struct BenchRow {
  Index n = 0;
  Index m = 0;
  Algorithm algorithm = Algorithm::RandQlp;
  double seconds = 0.0;
  std::optional<std::uint64_t> flops_model;
};

/// Median wall time of config.repeats runs after one warm-up, per size and
/// algorithm. Sizes come from config.sizes (square Gaussian matrices seeded
/// by the first seed, default 1) or from the input source.
std::vector<BenchRow> cmd_bench(const RunConfig& config, std::ostream& log);
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

/// Parses `args` (without the program name) and dispatches. Returns the
/// process exit code; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rqlp::cli
