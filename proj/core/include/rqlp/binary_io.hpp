#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "rqlp/matgen.hpp"
#include "rqlp/matrix.hpp"

namespace rqlp {

// Binary matrix file: 4-byte magic "RQLP", u64 rows, u64 cols (20-byte
// header), then rows·cols f64 values in column-major order. All integers and
// doubles little-endian.
inline constexpr char kBinaryMagic[4] = {'R', 'Q', 'L', 'P'};
inline constexpr std::size_t kBinaryHeaderBytes = 20;

void write_binary(std::ostream& out, const DenseMatrix& a);
DenseMatrix read_binary(std::istream& in, std::uint64_t memory_cap = kDefaultMemoryCap);

void write_binary_file(const std::filesystem::path& path, const DenseMatrix& a);
DenseMatrix read_binary_file(const std::filesystem::path& path,
                             std::uint64_t memory_cap = kDefaultMemoryCap);

}  // namespace rqlp
