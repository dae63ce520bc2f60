#pragma once

#include <optional>
#include <string>

#include "imsp/core/linalg.hpp"
#include "imsp/core/rng.hpp"

namespace imsp::data {

/// Binary pixel mask selecting a perturbation subspace.
struct RegionMask {
  std::string name;
  Vector mask;  // D entries in {0,1}
};

enum class Band { top, middle, bottom };

std::string to_string(Band band);

// Horizontal thirds with row boundaries floor(h*k/3).
RegionMask band_mask(Band band, int height, int width);

// Rectangle [row, row+h) x [col, col+w); must lie inside the image.
RegionMask rect_mask(int row, int col, int h, int w, int height, int width);

// Perturbation intensity ||eta|| / ||x||.
double intensity(const Vector& eta, const Vector& x);

// Gaussian noise restricted to the mask, scaled so ||eta|| / ||x|| equals
// `level` exactly.
Vector scaled_noise(const Vector& x, double level, SeededRng& rng, const RegionMask* mask = nullptr);

// x + scaled_noise, clipped to [0,1].
Vector add_noise_at_intensity(const Vector& x, double level, SeededRng& rng, const RegionMask* mask = nullptr);

Vector clip01(const Vector& x);

}  // namespace imsp::data
