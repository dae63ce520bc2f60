#pragma once

#include <filesystem>
#include <stdexcept>

#include "imsp/core/linalg.hpp"

namespace imsp::data {

struct Image {
  int height = 0;
  int width = 0;
  Vector pixels;  // row-major, [0,1]
};

class PgmError : public std::runtime_error {
 public:
  PgmError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Binary P5, maxval 255. Pixels are rounded to the nearest level.
void write_pgm(const std::filesystem::path& path, const Image& image);
Image read_pgm(const std::filesystem::path& path);

// In-memory variants used by the file functions.
std::string encode_pgm(const Image& image);
Image decode_pgm(const std::string& bytes);

}  // namespace imsp::data
