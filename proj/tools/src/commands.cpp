#include "rqlp/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rqlp/binary_io.hpp"
#include "rqlp/bounds.hpp"
#include "rqlp/decompositions.hpp"
#include "rqlp/kernels.hpp"

namespace rqlp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void make_directory(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

// Every output goes through this check first, so a refused run writes nothing.
void check_writable(const std::vector<fs::path>& paths, bool force) {
  if (force) return;
  for (const auto& p : paths) {
    if (fs::exists(p)) throw IoError("refusing to overwrite '" + p.string() + "' (pass --force)");
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

fs::path require_out(const RunConfig& config, const char* command) {
  if (config.out.empty()) throw UsageError(std::string(command) + " needs --out");
  return config.out;
}

QrOptions qr_options(int threads) {
  QrOptions opt;
  opt.threads = std::max(threads, 1);
  return opt;
}

double relative_residual(const DenseMatrix& a, const DenseMatrix& product) {
  const double scale = frobenius_norm(a);
  const double diff = frobenius_norm(a - product);
  return scale > 0.0 ? diff / scale : diff;
}

std::vector<double> sorted_magnitudes(std::vector<double> v) {
  for (double& x : v) x = std::abs(x);
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

std::string diag_csv(const std::vector<double>& raw) {
  const std::vector<double> sorted = sorted_magnitudes(raw);
  std::string text = "i,diag,estimate\n";
  for (std::size_t i = 0; i < raw.size(); ++i) {
    text += std::to_string(i + 1) + "," + format_double(raw[i]) + "," + format_double(sorted[i]) + "\n";
  }
  return text;
}

std::string sigma_csv(const std::vector<double>& sigma) {
  std::string text = "i,sigma\n";
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    text += std::to_string(i + 1) + "," + format_double(sigma[i]) + "\n";
  }
  return text;
}

std::string perm_csv(const std::vector<Index>& perm) {
  std::string text = "position,column\n";
  for (std::size_t i = 0; i < perm.size(); ++i) {
    text += std::to_string(i + 1) + "," + std::to_string(perm[i] + 1) + "\n";
  }
  return text;
}

template <class F>
double time_seconds(F&& f) {
  const auto start = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_matrix_market(const fs::path& path) {
  const std::string ext = path.extension().string();
  return ext == ".mtx" || ext == ".mm";
}

}  // namespace

std::string_view to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::RandQlp: return "randqlp";
    case Algorithm::PivotedQlp: return "pqlp";
    case Algorithm::Cpqr: return "cpqr";
    case Algorithm::Svd: return "svd";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (auto alg : {Algorithm::RandQlp, Algorithm::PivotedQlp, Algorithm::Cpqr, Algorithm::Svd}) {
    if (name == to_string(alg)) return alg;
  }
  throw UsageError("unknown algorithm '" + std::string(name) + "' (expected randqlp, pqlp, cpqr or svd)");
}

std::vector<Algorithm> parse_algorithms(std::string_view list) {
  std::vector<Algorithm> algs;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    const std::string_view item = list.substr(start, comma - start);
    if (item.empty()) throw UsageError("empty entry in algorithm list '" + std::string(list) + "'");
    const Algorithm alg = parse_algorithm(item);
    if (std::find(algs.begin(), algs.end(), alg) == algs.end()) algs.push_back(alg);
    start = comma + 1;
  }
  return algs;
}

namespace {

std::uint64_t parse_unsigned(std::string_view text, std::string_view what) {
  std::uint64_t value = 0;
  if (text.empty()) throw UsageError("empty " + std::string(what));
  for (char c : text) {
    if (c < '0' || c > '9') throw UsageError("malformed " + std::string(what) + " '" + std::string(text) + "'");
    const auto digit = static_cast<std::uint64_t>(c - '0');
    if (value > (UINT64_MAX - digit) / 10) throw UsageError(std::string(what) + " out of range");
    value = value * 10 + digit;
  }
  return value;
}

}  // namespace

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
  constexpr std::uint64_t kMaxSeeds = 1'000'000;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const std::uint64_t first = parse_unsigned(text.substr(0, dots), "seed range");
    const std::uint64_t last = parse_unsigned(text.substr(dots + 2), "seed range");
    if (last < first) throw UsageError("seed range '" + std::string(text) + "' is empty");
    if (last - first >= kMaxSeeds) throw UsageError("seed range '" + std::string(text) + "' is too large");
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = first;; ++s) {
      seeds.push_back(s);
      if (s == last) break;
    }
    return seeds;
  }
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    seeds.push_back(parse_unsigned(text.substr(start, comma - start), "seed"));
    start = comma + 1;
  }
  return seeds;
}

std::uint64_t parse_memory_size(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size() && ((text[pos] >= '0' && text[pos] <= '9') || text[pos] == '.')) ++pos;
  const std::string number(text.substr(0, pos));
  std::string unit(text.substr(pos));
  std::transform(unit.begin(), unit.end(), unit.begin(), [](unsigned char c) { return std::tolower(c); });
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(number, &used);
    if (used != number.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw UsageError("malformed memory size '" + std::string(text) + "'");
  }
  double multiplier = 0.0;
  if (unit.empty() || unit == "b") multiplier = 1.0;
  else if (unit == "k" || unit == "kib") multiplier = 1024.0;
  else if (unit == "m" || unit == "mib") multiplier = 1024.0 * 1024.0;
  else if (unit == "g" || unit == "gib") multiplier = 1024.0 * 1024.0 * 1024.0;
  else if (unit == "kb") multiplier = 1e3;
  else if (unit == "mb") multiplier = 1e6;
  else if (unit == "gb") multiplier = 1e9;
  else throw UsageError("unknown memory unit in '" + std::string(text) + "'");
  const double bytes = value * multiplier;
  if (!(bytes >= 1.0) || bytes > 1.8e19) throw UsageError("memory size '" + std::string(text) + "' out of range");
  return static_cast<std::uint64_t>(bytes);
}

std::vector<Index> parse_sizes(std::string_view text) {
  std::vector<Index> sizes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::uint64_t v = parse_unsigned(text.substr(start, comma - start), "size");
    if (v < 1 || v > 1'000'000) throw UsageError("size " + std::to_string(v) + " out of range");
    sizes.push_back(static_cast<Index>(v));
    start = comma + 1;
  }
  return sizes;
}

LoadedInput load_input(const InputSource& source, std::uint64_t memory_cap) {
  const int given = int{source.spec_path.has_value()} + int{source.matrix_path.has_value()} +
                    int{source.inline_spec.has_value()};
  if (given != 1) throw UsageError("exactly one input source is required (--spec, --input or --kind)");

  if (source.matrix_path) {
    const fs::path& path = *source.matrix_path;
    LoadedInput in;
    in.a = is_matrix_market(path) ? matrix_market_read(path, memory_cap) : read_binary_file(path, memory_cap);
    in.label = path.string();
    return in;
  }
  SpectrumSpec spec;
  std::uint64_t seed = source.matrix_seed.value_or(1);
  if (source.spec_path) {
    const std::string text = read_text_file(*source.spec_path);
    // gen writes {"seed": s, "spec": {...}}; a bare spec object is accepted too.
    const json doc = json::parse(text, nullptr, false);
    if (doc.is_object() && doc.contains("spec")) {
      spec = SpectrumSpec::from_json(doc["spec"].dump());
      if (!source.matrix_seed && doc.contains("seed") && doc["seed"].is_number_unsigned()) {
        seed = doc["seed"].get<std::uint64_t>();
      }
    } else {
      spec = SpectrumSpec::from_json(text);
    }
  } else {
    spec = *source.inline_spec;
  }
  spec.validate();
  const std::uint64_t bytes = static_cast<std::uint64_t>(spec.rows()) * static_cast<std::uint64_t>(spec.n) * 8;
  if (bytes > memory_cap) {
    throw CapacityError("generated matrix needs " + std::to_string(bytes) + " bytes, cap is " +
                        std::to_string(memory_cap));
  }
  LoadedInput in;
  in.truth = build(spec, seed);
  in.a = in.truth->a;
  in.label = std::string(to_string(spec.kind)) + " n=" + std::to_string(spec.n) + " seed " +
             std::to_string(seed);
  return in;
}

void cmd_gen(const RunConfig& config, std::ostream& log) {
  const fs::path out = require_out(config, "gen");
  if (config.input.matrix_path) throw UsageError("gen builds from a spectrum spec; --input is not accepted");

  // Without --seed/--seeds the generator seed comes from --matrix-seed, the
  // spec file, or defaults to 1 (resolved by load_input).
  std::vector<std::optional<std::uint64_t>> seeds;
  for (std::uint64_t seed : config.seeds) seeds.emplace_back(seed);
  if (seeds.empty()) seeds.emplace_back(std::nullopt);

  const bool several = seeds.size() > 1;
  auto dir_for = [&](const std::optional<std::uint64_t>& seed) {
    return several ? out / ("seed-" + std::to_string(*seed)) : out;
  };
  std::vector<fs::path> targets;
  for (const auto& seed : seeds) {
    for (const char* name : {"matrix.bin", "sigma.csv", "spec.json"}) targets.push_back(dir_for(seed) / name);
  }
  check_writable(targets, config.force);

  for (const auto& seed : seeds) {
    InputSource source = config.input;
    if (seed) source.matrix_seed = seed;
    const LoadedInput in = load_input(source, config.memory_cap);
    const fs::path dir = dir_for(seed);
    make_directory(dir);
    write_binary_file(dir / "matrix.bin", in.a);
    write_text_file(dir / "sigma.csv", sigma_csv(in.truth->sigma_true));
    json meta;
    meta["seed"] = in.truth->seed;
    meta["spec"] = json::parse(in.truth->spec.to_json());
    write_text_file(dir / "spec.json", meta.dump(2) + "\n");
    log << "gen: " << in.label << " -> " << dir.string() << "\n";
  }
}

std::vector<DecomposeResult> cmd_decompose(const RunConfig& config, std::ostream& log) {
  const fs::path out = require_out(config, "decompose");
  if (config.algorithms.empty()) throw UsageError("decompose needs at least one algorithm");
  if (config.seeds.size() > 1) throw UsageError("decompose takes a single --seed");
  const std::uint64_t seed = config.seeds.empty() ? 1 : config.seeds.front();

  std::vector<fs::path> targets{out / "residuals.json", out / "timing.json"};
  for (Algorithm alg : config.algorithms) {
    const fs::path dir = out / std::string(to_string(alg));
    switch (alg) {
      case Algorithm::RandQlp:
      case Algorithm::PivotedQlp:
        for (const char* name : {"q.bin", "l.bin", "p.bin", "diag.csv"}) targets.push_back(dir / name);
        break;
      case Algorithm::Cpqr:
        for (const char* name : {"q.bin", "r.bin", "perm.csv", "diag.csv"}) targets.push_back(dir / name);
        break;
      case Algorithm::Svd:
        for (const char* name : {"u.bin", "v.bin", "diag.csv"}) targets.push_back(dir / name);
        break;
    }
  }
  check_writable(targets, config.force);

  const LoadedInput in = load_input(config.input, config.memory_cap);
  const QrOptions opt = qr_options(config.threads);
  std::vector<DecomposeResult> results;
  json residuals = json::object();
  json timing = json::object();

  for (Algorithm alg : config.algorithms) {
    const std::string name(to_string(alg));
    const fs::path dir = out / name;
    make_directory(dir);
    DecomposeResult res;
    res.algorithm = alg;
    std::vector<double> raw;

    switch (alg) {
      case Algorithm::RandQlp:
      case Algorithm::PivotedQlp: {
        QlpFactors f;
        res.seconds = time_seconds([&] {
          if (alg == Algorithm::RandQlp) {
            GaussianStream stream(seed);
            f = rand_qlp(in.a, stream, opt);
          } else {
            f = pivoted_qlp(in.a, opt);
          }
        });
        res.residual = relative_residual(in.a, reconstruct(f, opt.threads));
        raw = f.diagonal();
        write_binary_file(dir / "q.bin", f.q);
        write_binary_file(dir / "l.bin", f.l);
        write_binary_file(dir / "p.bin", f.p);
        break;
      }
      case Algorithm::Cpqr: {
        CpqrFactors f;
        res.seconds = time_seconds([&] { f = cpqr(in.a, opt); });
        res.residual = relative_residual(permute_cols(in.a, f.perm), matmul(f.q, f.r));
        raw = f.r.diagonal();
        write_binary_file(dir / "q.bin", f.q);
        write_binary_file(dir / "r.bin", f.r);
        write_text_file(dir / "perm.csv", perm_csv(f.perm));
        break;
      }
      case Algorithm::Svd: {
        SvdFactors f;
        res.seconds = time_seconds([&] { f = jacobi_svd(in.a); });
        res.residual = relative_residual(in.a, reconstruct(svd_as_qlp(f), opt.threads));
        raw = f.sigma;
        write_binary_file(dir / "u.bin", f.u);
        write_binary_file(dir / "v.bin", f.v);
        break;
      }
    }
    write_text_file(dir / "diag.csv", diag_csv(raw));
    res.estimates = sorted_magnitudes(raw);

    json entry{{"residual", res.residual}};
    if (alg == Algorithm::RandQlp) entry["seed"] = seed;
    residuals[name] = entry;
    timing[name] = res.seconds;
    log << "decompose: " << name << " residual " << format_double(res.residual) << " in " << res.seconds
        << " s\n";
    results.push_back(std::move(res));
  }

  json meta{{"input", in.label}, {"rows", in.a.rows()}, {"cols", in.a.cols()}, {"algorithms", residuals}};
  write_text_file(out / "residuals.json", meta.dump(2) + "\n");
  write_text_file(out / "timing.json", json{{"threads", opt.threads}, {"seconds", timing}}.dump(2) + "\n");
  return results;
}

int BoundsSummary::violations() const {
  int total = 0;
  for (const auto& s : seeds) total += s.violations;
  return total;
}

int BoundsSummary::errors() const {
  return static_cast<int>(std::count_if(seeds.begin(), seeds.end(), [](const SeedOutcome& s) {
    return !s.error.empty();
  }));
}

std::string BoundsSummary::to_json() const {
  json per_seed = json::array();
  for (const auto& s : seeds) {
    if (s.error.empty()) {
      per_seed.push_back({{"seed", s.seed}, {"violations", s.violations}, {"ratio_norm", s.ratio_norm}});
    } else {
      per_seed.push_back({{"seed", s.seed}, {"error", s.error}});
    }
  }
  json j{{"k", k}, {"n", n}, {"seeds", static_cast<int>(seeds.size())}, {"violations", violations()},
         {"errors", errors()}, {"per_seed", per_seed}};
  return j.dump(2);
}

BoundsSummary cmd_bounds(const RunConfig& config, std::ostream& log) {
  const std::vector<std::uint64_t> seeds = config.seeds.empty() ? std::vector<std::uint64_t>{1} : config.seeds;
  const LoadedInput in = load_input(config.input, config.memory_cap);
  const Index n = in.a.cols();
  Index k = config.k;
  if (k == 0 && in.truth) k = in.truth->spec.k;
  if (k < 1 || k >= n) {
    throw ParameterError("bounds needs a split index 1 <= k < n = " + std::to_string(n) + ", got " +
                         std::to_string(k));
  }
  if (!config.out.empty()) {
    std::vector<fs::path> targets{config.out / "summary.json"};
    for (std::uint64_t seed : seeds) targets.push_back(config.out / ("seed-" + std::to_string(seed) + ".json"));
    check_writable(targets, config.force);
  }

  const SvdFactors oracle = jacobi_svd(in.a);
  BoundsSummary summary;
  summary.k = k;
  summary.n = n;
  summary.seeds.resize(seeds.size());

  auto run_seed = [&](std::size_t i) {
    SeedOutcome& outcome = summary.seeds[i];
    outcome.seed = seeds[i];
    try {
      GaussianStream stream(outcome.seed);
      const QlpFactors f = rand_qlp(in.a, stream);
      const BoundReport rep = check_theorem2(in.a, f, oracle, k);
      outcome.violations = rep.violations();
      outcome.ratio_norm = rep.ratio_norm;
      outcome.report_json = to_json(rep, 2);
    } catch (const SingularSketchError& e) {
      outcome.error = e.what();
    }
  };

  // Seeds fan out over the worker pool; every outcome has its own slot, so
  // the result does not depend on scheduling.
  const auto workers = static_cast<std::size_t>(std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(config.threads, 1)), 1, seeds.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_seed(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
              run_seed(i);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  if (!config.out.empty()) {
    make_directory(config.out);
    for (const auto& s : summary.seeds) {
      const std::string body = s.error.empty() ? s.report_json : json{{"seed", s.seed}, {"error", s.error}}.dump(2);
      write_text_file(config.out / ("seed-" + std::to_string(s.seed) + ".json"), body + "\n");
    }
    write_text_file(config.out / "summary.json", summary.to_json() + "\n");
  }
  log << "bounds: " << in.label << ", k=" << k << ", " << summary.seeds.size() << " seeds, "
      << summary.violations() << " violations, " << summary.errors() << " errors\n";
  return summary;
}

std::vector<BenchRow> cmd_bench(const RunConfig& config, std::ostream& log) {
  if (config.algorithms.empty()) throw UsageError("bench needs at least one algorithm");
  if (config.repeats < 1) throw UsageError("--repeats must be at least 1");
  const bool from_sizes = !config.sizes.empty();
  const bool from_input = config.input.spec_path || config.input.matrix_path || config.input.inline_spec;
  if (from_sizes == from_input) throw UsageError("bench needs either --sizes or one input source");
  const fs::path csv_path = config.out.empty() ? fs::path{} : config.out / "bench.csv";
  if (!csv_path.empty()) check_writable({csv_path}, config.force);

  std::vector<DenseMatrix> inputs;
  if (from_sizes) {
    for (Index n : config.sizes) {
      const std::uint64_t bytes = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n) * 8;
      if (bytes > config.memory_cap) throw CapacityError("bench size " + std::to_string(n) + " exceeds the memory cap");
      GaussianStream stream(config.seeds.empty() ? 1 : config.seeds.front());
      inputs.push_back(gaussian_matrix(stream, n, n));
    }
  } else {
    inputs.push_back(load_input(config.input, config.memory_cap).a);
  }

  const QrOptions opt = qr_options(config.threads);
  const std::uint64_t sketch_seed = config.seeds.empty() ? 1 : config.seeds.front();
  std::vector<BenchRow> rows;
  for (const DenseMatrix& a : inputs) {
    for (Algorithm alg : config.algorithms) {
      auto once = [&] {
        switch (alg) {
          case Algorithm::RandQlp: {
            GaussianStream stream(sketch_seed);
            (void)rand_qlp(a, stream, opt);
            break;
          }
          case Algorithm::PivotedQlp: (void)pivoted_qlp(a, opt); break;
          case Algorithm::Cpqr: (void)cpqr(a, opt); break;
          case Algorithm::Svd: (void)jacobi_svd(a); break;
        }
      };
      once();
      std::vector<double> times;
      for (int r = 0; r < config.repeats; ++r) times.push_back(time_seconds(once));
      std::sort(times.begin(), times.end());
      const std::size_t mid = times.size() / 2;
      const double median = times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);

      BenchRow row{a.cols(), a.rows(), alg, median, std::nullopt};
      const auto m = static_cast<std::uint64_t>(a.rows());
      const auto n = static_cast<std::uint64_t>(a.cols());
      switch (alg) {
        case Algorithm::RandQlp: row.flops_model = flops_rand_qlp(m, n); break;
        case Algorithm::Cpqr: row.flops_model = flops_cpqr(m, n); break;
        case Algorithm::PivotedQlp: row.flops_model = flops_cpqr(m, n) + flops_cpqr(n, n); break;
        case Algorithm::Svd: break;
      }
      log << "bench: n=" << row.n << " " << to_string(alg) << " " << median << " s\n";
      rows.push_back(row);
    }
  }

  if (!csv_path.empty()) {
    make_directory(config.out);
    std::ostringstream csv;
    write_bench_csv(csv, rows);
    write_text_file(csv_path, csv.str());
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "n,alg,seconds,flops_model\n";
  for (const auto& r : rows) {
    char seconds[32];
    std::snprintf(seconds, sizeof seconds, "%.6g", r.seconds);
    out << r.n << "," << to_string(r.algorithm) << "," << seconds << ",";
    if (r.flops_model) out << *r.flops_model;
    out << "\n";
  }
}

}  // namespace rqlp::cli
