#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "imsp/core/linalg.hpp"

namespace imsp {

// Record layout: "IMSP", u32 version, u32 rows, u32 cols, rows*cols f64,
// everything little-endian, payload row-major.
inline constexpr std::array<char, 4> kMatrixMagic{'I', 'M', 'S', 'P'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);

void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);

// Vectors are stored as 1 x n records.
void write_vector(std::ostream& out, const Vector& v);
Vector read_vector(std::istream& in);

void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

}  // namespace imsp
