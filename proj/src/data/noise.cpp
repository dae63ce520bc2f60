#include "imsp/data/noise.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace imsp::data {

std::string to_string(Band band) {
  switch (band) {
    case Band::top: return "top";
    case Band::middle: return "middle";
    case Band::bottom: return "bottom";
  }
  return "?";
}

RegionMask band_mask(Band band, int height, int width) {
  const int k = band == Band::top ? 0 : band == Band::middle ? 1 : 2;
  const int r0 = height * k / 3;
  const int r1 = height * (k + 1) / 3;
  RegionMask m = rect_mask(r0, 0, r1 - r0, width, height, width);
  m.name = to_string(band);
  return m;
}

RegionMask rect_mask(int row, int col, int h, int w, int height, int width) {
  if (h <= 0 || w <= 0 || row < 0 || col < 0 || row + h > height || col + w > width)
    throw std::invalid_argument(
        fmt::format("region {}x{} at ({},{}) outside {}x{} image", h, w, row, col, height, width));
  RegionMask m;
  m.name = fmt::format("rect{}x{}@{},{}", h, w, row, col);
  m.mask = Vector::Zero(static_cast<Eigen::Index>(height) * width);
  for (int r = row; r < row + h; ++r)
    for (int c = col; c < col + w; ++c) m.mask(r * width + c) = 1.0;
  return m;
}

double intensity(const Vector& eta, const Vector& x) {
  const double nx = x.norm();
  if (nx == 0.0) throw std::invalid_argument("intensity undefined for an all-zero image");
  return eta.norm() / nx;
}

Vector scaled_noise(const Vector& x, double level, SeededRng& rng, const RegionMask* mask) {
  if (level < 0.0) throw std::invalid_argument("noise intensity must be non-negative");
  if (mask && mask->mask.size() != x.size()) throw std::invalid_argument("mask size differs from image");
  if (level == 0.0) return Vector::Zero(x.size());
  const double nx = x.norm();
  if (nx == 0.0) throw std::invalid_argument("noise intensity undefined for an all-zero image");
  Vector eta = gaussian_draw(rng, static_cast<std::size_t>(x.size()));
  if (mask) eta = eta.cwiseProduct(mask->mask);
  const double ne = eta.norm();
  if (ne == 0.0) throw std::invalid_argument("empty noise support");
  return eta * (level * nx / ne);
}

Vector add_noise_at_intensity(const Vector& x, double level, SeededRng& rng, const RegionMask* mask) {
  if (level == 0.0) return x;
  return clip01(x + scaled_noise(x, level, rng, mask));
}

Vector clip01(const Vector& x) { return x.cwiseMax(0.0).cwiseMin(1.0); }

}  // namespace imsp::data
