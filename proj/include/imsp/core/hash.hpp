#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "imsp/core/linalg.hpp"

namespace imsp {

// FNV-1a, 64 bit. Content hashes for datasets, checkpoints and configs.
class Hasher {
 public:
  Hasher& bytes(const void* data, std::size_t n);
  Hasher& u64(std::uint64_t v);
  Hasher& f64(double v);
  Hasher& str(std::string_view s);
  Hasher& vec(const Vector& v);
  Hasher& mat(const Matrix& m);
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hex64(std::uint64_t h);
std::uint64_t parse_hex64(std::string_view s);

}  // namespace imsp
