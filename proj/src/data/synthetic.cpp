#include "imsp/data/synthetic.hpp"

#include <cmath>
#include <numbers>

namespace imsp::data {

namespace {

constexpr double kBackground = 0.15;
constexpr double kFace = 0.55;

// Shared face template: soft ellipse; identity blobs are added on top.
double face_value(double r, double c, double h, double w) {
  const double dr = (r - 0.5 * (h - 1)) / (0.44 * h);
  const double dc = (c - 0.5 * (w - 1)) / (0.36 * w);
  const double d = std::sqrt(dr * dr + dc * dc);
  const double edge = 1.0 / (1.0 + std::exp((d - 1.0) * 12.0));
  return kBackground + (kFace - kBackground) * edge;
}

Vector render(const IdentityLatent& latent, const RenderConfig& cfg, double dr, double dc, double contrast) {
  const int h = cfg.height;
  const int w = cfg.width;
  Vector img(static_cast<Eigen::Index>(h) * w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double y = r - dr;
      const double x = c - dc;
      double v = face_value(y, x, h, w);
      for (const Blob& b : latent.blobs) {
        const double ca = std::cos(b.angle);
        const double sa = std::sin(b.angle);
        const double u = (y - b.row) * ca + (x - b.col) * sa;
        const double t = -(y - b.row) * sa + (x - b.col) * ca;
        v += b.amplitude *
             std::exp(-0.5 * (u * u / (b.sigma_major * b.sigma_major) + t * t / (b.sigma_minor * b.sigma_minor)));
      }
      if (!latent.gratings.empty()) {
        const double row_hi = (1.0 - cfg.bottom_free_fraction) * h;
        const double window = (face_value(y, x, h, w) - kBackground) / (kFace - kBackground) /
                              (1.0 + std::exp((y - row_hi) * 1.5));
        double t = 0.0;
        for (const Grating& g : latent.gratings)
          t += g.amplitude * std::cos(2.0 * std::numbers::pi * (g.fy * y + g.fx * x) + g.phase);
        v += window * t;
      }
      img(r * w + c) = v;
    }
  }
  if (contrast != 1.0) {
    const double mean = img.mean();
    img = ((img.array() - mean) * contrast + mean).matrix();
  }
  return img;
}

}  // namespace

IdentityLatent sample_latent(int id, const RenderConfig& cfg, SeededRng& rng) {
  IdentityLatent latent;
  latent.id = id;
  const double h = cfg.height;
  const double w = cfg.width;
  const double row_hi = (1.0 - cfg.bottom_free_fraction) * h - 1.5;
  for (int i = 0; i < cfg.blobs; ++i) {
    Blob b;
    b.row = rng.uniform(0.15 * h, row_hi);
    b.col = rng.uniform(0.2 * w, 0.8 * w);
    b.sigma_major = rng.uniform(0.06, 0.13) * w;
    b.sigma_minor = rng.uniform(0.03, 0.06) * w;
    b.angle = rng.uniform(0.0, std::numbers::pi);
    const double mag = rng.uniform(cfg.amplitude_min, cfg.amplitude_max);
    b.amplitude = rng.bernoulli(0.5) ? mag : -mag;
    latent.blobs.push_back(b);
  }
  for (int i = 0; i < cfg.gratings; ++i) {
    Grating g;
    const double f = rng.uniform(cfg.texture_freq_min, cfg.texture_freq_max);
    const double a = rng.uniform(0.0, std::numbers::pi);
    g.fy = f * std::sin(a);
    g.fx = f * std::cos(a);
    g.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    g.amplitude = cfg.texture_amplitude;
    latent.gratings.push_back(g);
  }
  return latent;
}

Vector render_canonical(const IdentityLatent& latent, const RenderConfig& cfg) {
  return render(latent, cfg, 0.0, 0.0, 1.0).cwiseMax(0.0).cwiseMin(1.0);
}

Vector render_identity_sample(const IdentityLatent& latent, const RenderConfig& cfg,
                              std::uint64_t variation_seed) {
  SeededRng rng(variation_seed, 0x5a17);
  const double dr = rng.uniform(-cfg.max_shift, cfg.max_shift);
  const double dc = rng.uniform(-cfg.max_shift, cfg.max_shift);
  const double contrast = rng.uniform(1.0 - cfg.contrast_jitter, 1.0 + cfg.contrast_jitter);
  Vector img = render(latent, cfg, dr, dc, contrast);
  for (Eigen::Index i = 0; i < img.size(); ++i) img(i) += cfg.pixel_noise * rng.normal();
  return img.cwiseMax(0.0).cwiseMin(1.0);
}

double image_mse(const Vector& a, const Vector& b) { return (a - b).squaredNorm() / static_cast<double>(a.size()); }

}  // namespace imsp::data
