#include "imsp/attack/sticker.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace imsp::attack {

namespace {

void check_region(const StickerSpec& spec, int h, int w) {
  if (spec.height <= 0 || spec.width <= 0 || spec.row < 0 || spec.col < 0 || spec.row + spec.height > h ||
      spec.col + spec.width > w)
    throw std::invalid_argument(fmt::format("sticker region {}x{} at ({},{}) outside {}x{} image", spec.height,
                                            spec.width, spec.row, spec.col, h, w));
}

Vector gather(const Vector& x, const StickerSpec& spec, int image_width) {
  Vector out(spec.height * spec.width);
  for (int r = 0; r < spec.height; ++r)
    for (int c = 0; c < spec.width; ++c) out(r * spec.width + c) = x((spec.row + r) * image_width + spec.col + c);
  return out;
}

}  // namespace

Vector apply_sticker(const Vector& x, const Vector& patch, const StickerSpec& spec, int image_width) {
  if (image_width <= 0 || x.size() % image_width != 0)
    throw std::invalid_argument("apply_sticker: image size is not a multiple of the width");
  check_region(spec, static_cast<int>(x.size() / image_width), image_width);
  if (patch.size() != static_cast<Eigen::Index>(spec.height) * spec.width)
    throw std::invalid_argument("apply_sticker: patch size does not match the region");
  Vector y = x;
  for (int r = 0; r < spec.height; ++r)
    for (int c = 0; c < spec.width; ++c) y((spec.row + r) * image_width + spec.col + c) = patch(r * spec.width + c);
  return y;
}

StickerResult sticker_attack(const AttackTarget& target, const std::vector<Vector>& gallery,
                             const Vector& target_image, const StickerSpec& spec, int image_height,
                             int image_width, SeededRng& rng) {
  if (gallery.empty()) throw std::invalid_argument("sticker_attack: empty gallery");
  check_region(spec, image_height, image_width);
  if (spec.steps < 0 || spec.restarts < 1) throw std::invalid_argument("sticker_attack: bad schedule");

  SeededRng attack_rng = rng.derive(1);
  const Vector ref_attack = target.attack_embedding(target_image, &attack_rng);
  const auto n = static_cast<double>(gallery.size());
  const int size = spec.height * spec.width;

  StickerResult best;
  double best_score = -2.0;
  for (int restart = 0; restart < spec.restarts; ++restart) {
    SeededRng init_rng = rng.derive(100 + restart);
    Vector patch(size);
    for (int i = 0; i < size; ++i) patch(i) = restart == 0 ? 0.5 : init_rng.uniform();
    double mean_s = 0.0;
    for (int step = 0; step <= spec.steps; ++step) {
      Vector grad = Vector::Zero(size);
      mean_s = 0.0;
      for (const Vector& x : gallery) {
        Vector g;
        mean_s += target.attack_score(apply_sticker(x, patch, spec, image_width), ref_attack, &attack_rng,
                                      step < spec.steps ? &g : nullptr) / n;
        if (step < spec.steps) grad += gather(g, spec, image_width);
      }
      if (step == spec.steps) break;
      const Vector sign = grad.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
      patch = (patch + spec.step_size * sign).cwiseMax(0.0).cwiseMin(1.0);
    }
    if (mean_s > best_score) {
      best_score = mean_s;
      best.patch = patch;
      best.restart_used = restart;
    }
  }
  best.mean_attack_similarity = best_score;

  // Deployed evaluation with its own stream.
  SeededRng eval_rng = rng.derive(2);
  const Vector ref_deployed = target.deployed_embedding(target_image, &eval_rng);
  std::size_t hits = 0;
  std::size_t clean_hits = 0;
  for (const Vector& x : gallery) {
    const bool ok = target.deployed_accepts(apply_sticker(x, best.patch, spec, image_width), ref_deployed, &eval_rng);
    best.success.push_back(ok);
    hits += ok;
    clean_hits += target.deployed_accepts(x, ref_deployed, &eval_rng);
  }
  best.error_rate = hits / n;
  best.clean_error_rate = clean_hits / n;
  return best;
}

}  // namespace imsp::attack
