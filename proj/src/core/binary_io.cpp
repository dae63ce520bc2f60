#include "imsp/core/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace imsp {

namespace {

void write_le(std::ostream& out, std::uint64_t v, int bytes) {
  char buf[8];
  for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(buf, bytes);
}

std::uint64_t read_le(std::istream& in, int bytes) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), bytes);
  if (in.gcount() != bytes) throw FormatError("unexpected end of stream");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v, 4); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v, 8); }
std::uint32_t read_u32(std::istream& in) { return static_cast<std::uint32_t>(read_le(in, 4)); }
std::uint64_t read_u64(std::istream& in) { return read_le(in, 8); }

void write_matrix(std::ostream& out, const Matrix& m) {
  out.write(kMatrixMagic.data(), 4);
  write_u32(out, kMatrixFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(m.rows()));
  write_u32(out, static_cast<std::uint32_t>(m.cols()));
  const double* data = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) write_u64(out, std::bit_cast<std::uint64_t>(data[i]));
  if (!out) throw FormatError("write_matrix: stream failure");
}

Matrix read_matrix(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4) throw FormatError("read_matrix: missing magic");
  if (std::memcmp(magic, kMatrixMagic.data(), 4) != 0) throw FormatError("read_matrix: bad magic");
  const std::uint32_t version = read_u32(in);
  if (version != kMatrixFormatVersion)
    throw FormatError(fmt::format("read_matrix: unsupported version {}", version));
  const std::uint32_t rows = read_u32(in);
  const std::uint32_t cols = read_u32(in);
  Matrix m(rows, cols);
  double* data = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    try {
      data[i] = std::bit_cast<double>(read_u64(in));
    } catch (const FormatError&) {
      throw FormatError(fmt::format("read_matrix: truncated payload at element {} of {}", i, m.size()));
    }
  }
  return m;
}

void write_vector(std::ostream& out, const Vector& v) {
  write_matrix(out, Matrix(v.transpose()));
}

Vector read_vector(std::istream& in) {
  Matrix m = read_matrix(in);
  if (m.rows() != 1 && m.size() != 0)
    throw FormatError(fmt::format("read_vector: expected 1 row, got {}", m.rows()));
  return Eigen::Map<const Vector>(m.data(), m.size());
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot open {} for writing", path.string()));
  write_matrix(out, m);
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open {}", path.string()));
  return read_matrix(in);
}

}  // namespace imsp
