#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imsp/core/linalg.hpp"
#include "imsp/core/rng.hpp"

namespace imsp::data {

struct Blob {
  double row = 0.0;  // centre, pixels
  double col = 0.0;
  double sigma_major = 1.0;
  double sigma_minor = 1.0;
  double angle = 0.0;      // radians
  double amplitude = 0.0;  // signed intensity offset
};

// Fine identity texture: a plane-wave grating, frequencies in cycles/pixel.
struct Grating {
  double fy = 0.0;
  double fx = 0.0;
  double phase = 0.0;
  double amplitude = 0.0;
};

/// Parameters of one synthetic identity; rendering is a pure function of it.
struct IdentityLatent {
  int id = 0;
  std::vector<Blob> blobs;
  std::vector<Grating> gratings;
};

struct RenderConfig {
  int height = 32;
  int width = 32;
  int blobs = 6;
  // Blob centres are drawn from the top (1 - bottom_free_fraction) of the
  // face, so the lowest band carries little identity information.
  double bottom_free_fraction = 1.0 / 3.0;
  double max_shift = 1.0;        // pixels, uniform in [-max_shift, max_shift]
  double contrast_jitter = 0.2;  // contrast factor in [1 - j, 1 + j]
  double pixel_noise = 0.005;    // additive Gaussian sigma
  double amplitude_min = 0.06;   // blob |amplitude| range
  double amplitude_max = 0.14;
  // Low-amplitude high-frequency texture carried in the same upper region as
  // the blobs: weak, non-robust identity evidence that lives in the tail of
  // the pixel covariance spectrum.
  int gratings = 0;
  double texture_amplitude = 0.0;
  double texture_freq_min = 0.25;
  double texture_freq_max = 0.45;
};

IdentityLatent sample_latent(int id, const RenderConfig& cfg, SeededRng& rng);

// Canonical rendering (no variation).
Vector render_canonical(const IdentityLatent& latent, const RenderConfig& cfg);

// Canonical structure plus seeded shift, contrast and pixel noise.
Vector render_identity_sample(const IdentityLatent& latent, const RenderConfig& cfg,
                              std::uint64_t variation_seed);

double image_mse(const Vector& a, const Vector& b);

}  // namespace imsp::data
