#include "rqlp/binary_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rqlp/error.hpp"

namespace rqlp {

namespace {

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xff);
    return r;
  }
  return v;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  const std::uint64_t le = to_little(v);
  out.write(reinterpret_cast<const char*>(&le), sizeof le);
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t le = 0;
  if (!in.read(reinterpret_cast<char*>(&le), sizeof le)) throw ParseError("truncated binary header", 0);
  return to_little(le);
}

}  // namespace

void write_binary(std::ostream& out, const DenseMatrix& a) {
  out.write(kBinaryMagic, sizeof kBinaryMagic);
  put_u64(out, static_cast<std::uint64_t>(a.rows()));
  put_u64(out, static_cast<std::uint64_t>(a.cols()));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(a.data()),
              static_cast<std::streamsize>(a.values().size() * sizeof(double)));
  } else {
    for (double v : a.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw IoError("failed writing binary matrix");
}

DenseMatrix read_binary(std::istream& in, std::uint64_t memory_cap) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || std::memcmp(magic.data(), kBinaryMagic, 4) != 0) {
    throw ParseError("not an RQLP binary matrix (bad magic)", 0);
  }
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  const long double bytes = static_cast<long double>(rows) * static_cast<long double>(cols) * 8.0L;
  if (bytes > static_cast<long double>(memory_cap)) {
    throw CapacityError("binary matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " exceeds memory cap of " + std::to_string(memory_cap) + " bytes");
  }
  DenseMatrix a(static_cast<Index>(rows), static_cast<Index>(cols));
  if constexpr (std::endian::native == std::endian::little) {
    if (!in.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(bytes))) {
      throw ParseError("truncated binary matrix payload", 0);
    }
  } else {
    for (double& v : a.values()) v = std::bit_cast<double>(get_u64(in));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after matrix payload", 0);
  if (!a.all_finite()) throw InputError("binary matrix contains non-finite entries");
  return a;
}

void write_binary_file(const std::filesystem::path& path, const DenseMatrix& a) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_binary(out, a);
}

DenseMatrix read_binary_file(const std::filesystem::path& path, std::uint64_t memory_cap) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_binary(in, memory_cap);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

}  // namespace rqlp
