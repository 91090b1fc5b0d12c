#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rqlp/error.hpp"
#include "rqlp/matgen.hpp"

namespace rqlp {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // Next line that is neither blank nor a comment; false at end of input.
  bool next_data(std::string_view& line) {
    while (next(line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string_view::npos || line[first] == '%') continue;
      return true;
    }
    return false;
  }

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto end = text_.find('\n', pos_);
    line = text_.substr(pos_, end == std::string_view::npos ? std::string_view::npos : end - pos_);
    pos_ = end == std::string_view::npos ? text_.size() : end + 1;
    ++number_;
    return true;
  }

  std::size_t number() const noexcept { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

std::vector<std::string> tokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

template <typename T>
T parse_number(const std::string& tok, std::size_t line) {
  T value{};
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ParseError("malformed number '" + tok + "'", line);
  return value;
}

}  // namespace

DenseMatrix matrix_market_parse(std::string_view text, std::uint64_t memory_cap) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) throw ParseError("empty Matrix Market input", 1);

  const auto header = tokens(line);
  if (header.size() != 5 || header[0] != "%%MatrixMarket" || lower(header[1]) != "matrix") {
    throw ParseError("missing '%%MatrixMarket matrix <format> <field> <symmetry>' header", reader.number());
  }
  const std::string format = lower(header[2]);
  const std::string field = lower(header[3]);
  const std::string symmetry = lower(header[4]);
  if (format != "coordinate" && format != "array") {
    throw ParseError("unsupported format '" + header[2] + "'", reader.number());
  }
  if (field != "real" && field != "integer" && field != "double") {
    throw ParseError("unsupported field '" + header[3] + "' (only real-valued matrices)", reader.number());
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    throw ParseError("unsupported symmetry '" + header[4] + "'", reader.number());
  }
  const bool symmetric = symmetry == "symmetric";
  const bool coordinate = format == "coordinate";

  if (!reader.next_data(line)) throw ParseError("missing size line", reader.number() + 1);
  const auto size = tokens(line);
  if (size.size() != (coordinate ? 3U : 2U)) throw ParseError("malformed size line", reader.number());
  const auto rows = parse_number<long long>(size[0], reader.number());
  const auto cols = parse_number<long long>(size[1], reader.number());
  if (rows < 1 || cols < 1) throw ParseError("matrix dimensions must be positive", reader.number());
  if (symmetric && rows != cols) throw ParseError("symmetric matrix must be square", reader.number());

  const long double bytes = static_cast<long double>(rows) * static_cast<long double>(cols) * sizeof(double);
  if (bytes > static_cast<long double>(memory_cap)) {
    throw CapacityError("dense " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix needs " +
                        std::to_string(static_cast<unsigned long long>(bytes)) + " bytes, cap is " +
                        std::to_string(memory_cap));
  }
  DenseMatrix a(rows, cols);

  auto read_value = [&](const std::string& tok) {
    const double v = parse_number<double>(tok, reader.number());
    if (!std::isfinite(v)) throw ParseError("non-finite entry '" + tok + "'", reader.number());
    return v;
  };

  if (coordinate) {
    const auto nnz = parse_number<long long>(size[2], reader.number());
    if (nnz < 0) throw ParseError("negative entry count", reader.number());
    for (long long e = 0; e < nnz; ++e) {
      if (!reader.next_data(line)) {
        throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(e),
                         reader.number() + 1);
      }
      const auto t = tokens(line);
      if (t.size() != 3) throw ParseError("coordinate entry needs 'row col value'", reader.number());
      const auto i = parse_number<long long>(t[0], reader.number());
      const auto j = parse_number<long long>(t[1], reader.number());
      if (i < 1 || i > rows || j < 1 || j > cols) {
        throw ParseError("index (" + t[0] + ", " + t[1] + ") out of range", reader.number());
      }
      const double v = read_value(t[2]);
      a(i - 1, j - 1) += v;
      if (symmetric && i != j) a(j - 1, i - 1) += v;
    }
  } else {
    // Column-major; symmetric storage lists the lower triangle only.
    for (long long j = 0; j < cols; ++j) {
      for (long long i = symmetric ? j : 0; i < rows; ++i) {
        if (!reader.next_data(line)) throw ParseError("too few array entries", reader.number() + 1);
        const auto t = tokens(line);
        if (t.size() != 1) throw ParseError("array entry needs a single value", reader.number());
        const double v = read_value(t[0]);
        a(i, j) = v;
        if (symmetric) a(j, i) = v;
      }
    }
  }
  if (reader.next_data(line)) throw ParseError("unexpected trailing data", reader.number());
  return a;
}

DenseMatrix matrix_market_read(const std::filesystem::path& path, std::uint64_t memory_cap) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open Matrix Market file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return matrix_market_parse(buffer.str(), memory_cap);
}

}  // namespace rqlp
