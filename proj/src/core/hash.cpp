#include "imsp/core/hash.hpp"

#include <bit>
#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace imsp {

Hasher& Hasher::bytes(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    state_ ^= p[i];
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

Hasher& Hasher::u64(std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  return bytes(buf, 8);
}

Hasher& Hasher::f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }

Hasher& Hasher::str(std::string_view s) {
  u64(s.size());
  return bytes(s.data(), s.size());
}

Hasher& Hasher::vec(const Vector& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
  return *this;
}

Hasher& Hasher::mat(const Matrix& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
  return *this;
}

std::string hex64(std::uint64_t h) { return fmt::format("{:016x}", h); }

std::uint64_t parse_hex64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument(fmt::format("not a hex digest: '{}'", s));
  return v;
}

}  // namespace imsp
