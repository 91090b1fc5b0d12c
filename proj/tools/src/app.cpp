#include <cctype>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rqlp/cli/commands.hpp"

namespace rqlp::cli {

namespace {

constexpr const char* kEnvPrefix = "RQLP_";

// Raw flag values; interpreted after CLI11 has parsed the command line.
struct Flags {
  std::string spec;
  std::string input;
  std::string kind;
  Index n = 0;
  Index rows = 0;
  Index rank = 0;
  double noise_level = 0.05;
  std::string normalization = "spectral";
  double ramp_end = 1e-3;
  std::optional<std::uint64_t> matrix_seed;
  std::string seed;
  std::string seeds;
  Index k = 0;
  std::string out;
  std::string algs;
  int threads = 1;
  std::string mem_cap;
  bool force = false;
  int repeats = 5;
  std::string sizes;
};

// Every long flag can also be set through RQLP_<FLAG> (dashes become
// underscores); an explicit flag wins over the environment. CLI11 drops
// environment values that fail a validator, so range checks happen in
// to_config instead.
CLI::Option* with_env(CLI::Option* opt) {
  std::string name = opt->get_single_name();
  for (char& c : name) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return opt->envname(kEnvPrefix + name);
}

void add_input_options(CLI::App* sub, Flags& f, bool allow_matrix_file) {
  auto* spec = with_env(sub->add_option("--spec", f.spec, "spectrum spec JSON file")->check(CLI::ExistingFile));
  auto* kind = with_env(sub->add_option("--kind", f.kind,
                                        "inline spec: noisy-low-rank, fast-decay, s-shaped or linear"));
  if (allow_matrix_file) {
    auto* input = with_env(sub->add_option("--input", f.input, "matrix file (.mtx Matrix Market or RQLP binary)")
                               ->check(CLI::ExistingFile));
    input->excludes(spec)->excludes(kind);
  }
  spec->excludes(kind);
  with_env(sub->add_option("--n", f.n, "inline spec: columns"));
  with_env(sub->add_option("--rows", f.rows, "inline spec: rows (default n)"));
  with_env(sub->add_option("--rank", f.rank, "inline spec: rank k of noisy-low-rank"));
  with_env(sub->add_option("--noise-level", f.noise_level, "inline spec: noise level")->capture_default_str());
  with_env(sub->add_option("--normalization", f.normalization, "inline spec: spectral, entry or column")
               ->capture_default_str());
  with_env(sub->add_option("--ramp-end", f.ramp_end, "inline spec: last value of the linear ramp")
               ->capture_default_str());
  with_env(sub->add_option("--matrix-seed", f.matrix_seed, "generator seed for spec inputs (default 1)"));
}

void add_seed_options(CLI::App* sub, Flags& f, const char* what) {
  auto* seed = with_env(sub->add_option("--seed", f.seed, std::string(what) + " seed (default 1)"));
  auto* seeds = with_env(sub->add_option("--seeds", f.seeds, std::string(what) + " seeds: a..b or a,b,c"));
  seed->excludes(seeds);
}

void add_common_options(CLI::App* sub, Flags& f) {
  with_env(sub->add_option("--out", f.out, "output directory"));
  with_env(sub->add_option("--threads", f.threads, "worker threads")->capture_default_str());
  with_env(sub->add_option("--mem-cap", f.mem_cap, "largest dense matrix to allocate, e.g. 2GiB"));
  with_env(sub->add_flag("--force", f.force, "overwrite existing output files"));
}

RunConfig to_config(const Flags& f, const char* default_algs) {
  RunConfig c;
  if (!f.spec.empty()) c.input.spec_path = f.spec;
  if (!f.input.empty()) c.input.matrix_path = f.input;
  if (!f.kind.empty()) {
    SpectrumSpec spec;
    try {
      spec.kind = parse_spectrum_kind(f.kind);
      spec.normalization = parse_noise_normalization(f.normalization);
    } catch (const ParameterError& e) {
      throw UsageError(e.what());
    }
    spec.n = f.n;
    spec.m = f.rows == f.n ? 0 : f.rows;
    spec.k = f.rank;
    spec.noise_level = f.noise_level;
    spec.ramp_end = f.ramp_end;
    c.input.inline_spec = spec;
  }
  c.input.matrix_seed = f.matrix_seed;
  if (!f.seeds.empty()) c.seeds = parse_seeds(f.seeds);
  else if (!f.seed.empty()) c.seeds = parse_seeds(f.seed);
  c.k = f.k;
  c.out = f.out;
  c.algorithms = parse_algorithms(f.algs.empty() ? default_algs : f.algs);
  // Values taken from the environment skip the CLI11 validators.
  if (f.threads < 1 || f.threads > 256) throw UsageError("--threads must lie in [1, 256]");
  if (f.repeats < 1 || f.repeats > 1000) throw UsageError("--repeats must lie in [1, 1000]");
  c.threads = f.threads;
  if (!f.mem_cap.empty()) c.memory_cap = parse_memory_size(f.mem_cap);
  c.force = f.force;
  c.repeats = f.repeats;
  if (!f.sizes.empty()) c.sizes = parse_sizes(f.sizes);
  return c;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized QLP decomposition toolkit", "rqlp"};
  app.set_version_flag("--version", "rqlp 0.1.0");
  app.require_subcommand(1);

  Flags f;
  auto* gen = app.add_subcommand("gen", "generate a synthetic test matrix with known singular values");
  add_input_options(gen, f, false);
  add_seed_options(gen, f, "generator");
  add_common_options(gen, f);

  auto* decompose = app.add_subcommand("decompose", "factor a matrix and write factors, estimates and residuals");
  add_input_options(decompose, f, true);
  add_seed_options(decompose, f, "sketch");
  add_common_options(decompose, f);
  with_env(decompose->add_option("--algs", f.algs, "comma list of randqlp, pqlp, cpqr, svd (default randqlp)"));

  auto* bounds = app.add_subcommand("bounds", "check the rank-revealing and subspace bounds over sketch seeds");
  add_input_options(bounds, f, true);
  add_seed_options(bounds, f, "sketch");
  add_common_options(bounds, f);
  with_env(bounds->add_option("--k", f.k, "split index (default: the spec's rank)"));

  auto* bench = app.add_subcommand("bench", "time the algorithms across sizes");
  add_input_options(bench, f, true);
  add_seed_options(bench, f, "matrix and sketch");
  add_common_options(bench, f);
  with_env(bench->add_option("--algs", f.algs, "comma list of randqlp, pqlp, cpqr, svd (default randqlp,pqlp,cpqr)"));
  with_env(bench->add_option("--sizes", f.sizes, "square Gaussian sizes, e.g. 200,400,800"));
  with_env(bench->add_option("--repeats", f.repeats, "timed runs per point (median reported)")->capture_default_str());

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? static_cast<int>(ExitCode::Ok) : static_cast<int>(ExitCode::Usage);
  }

  try {
    if (gen->parsed()) {
      cmd_gen(to_config(f, "randqlp"), out);
    } else if (decompose->parsed()) {
      cmd_decompose(to_config(f, "randqlp"), out);
    } else if (bounds->parsed()) {
      const BoundsSummary summary = cmd_bounds(to_config(f, "randqlp"), err);
      out << summary.to_json() << "\n";
    } else if (bench->parsed()) {
      RunConfig config = to_config(f, "randqlp,pqlp,cpqr");
      write_bench_csv(out, cmd_bench(config, err));
    }
  } catch (const UsageError& e) {
    err << "rqlp: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Usage);
  } catch (const ParameterError& e) {
    err << "rqlp: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Usage);
  } catch (const std::exception& e) {
    err << "rqlp: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Runtime);
  }
  return static_cast<int>(ExitCode::Ok);
}

}  // namespace rqlp::cli
