#include "imsp/data/pgm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace imsp::data {

PgmError::PgmError(const std::string& what, std::size_t offset)
    : std::runtime_error(fmt::format("PGM: {} at byte {}", what, offset)), offset_(offset) {}

std::string encode_pgm(const Image& image) {
  if (image.height <= 0 || image.width <= 0 ||
      image.pixels.size() != static_cast<Eigen::Index>(image.height) * image.width)
    throw std::invalid_argument("encode_pgm: pixel count does not match dimensions");
  std::string out = fmt::format("P5\n{} {}\n255\n", image.width, image.height);
  out.reserve(out.size() + static_cast<std::size_t>(image.pixels.size()));
  for (Eigen::Index i = 0; i < image.pixels.size(); ++i) {
    const double v = std::clamp(image.pixels(i), 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  return out;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& s) : s_(s) {}

  void skip_space() {
    while (pos_ < s_.size()) {
      if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int number(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_] - '0');
      if (v > 1 << 20) throw PgmError(fmt::format("{} too large", what), start);
      ++pos_;
    }
    if (pos_ == start) throw PgmError(fmt::format("expected {}", what), start);
    return static_cast<int>(v);
  }

  std::size_t pos_ = 0;

 private:
  const std::string& s_;
};

}  // namespace

Image decode_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw PgmError("missing P5 magic", 0);
  HeaderReader hr(bytes);
  hr.pos_ = 2;
  Image img;
  img.width = hr.number("width");
  img.height = hr.number("height");
  const std::size_t maxval_at = hr.pos_;
  const int maxval = hr.number("maxval");
  if (img.width <= 0 || img.height <= 0) throw PgmError("zero dimension", maxval_at);
  if (maxval != 255) throw PgmError(fmt::format("unsupported maxval {}", maxval), maxval_at);
  if (hr.pos_ >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[hr.pos_])))
    throw PgmError("expected whitespace after maxval", hr.pos_);
  ++hr.pos_;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  if (bytes.size() - hr.pos_ < n)
    throw PgmError(fmt::format("truncated payload: {} of {} pixels", bytes.size() - hr.pos_, n), bytes.size());
  img.pixels.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    img.pixels(static_cast<Eigen::Index>(i)) = static_cast<unsigned char>(bytes[hr.pos_ + i]) / 255.0;
  return img;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  const std::string bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_pgm(ss.str());
}

}  // namespace imsp::data
