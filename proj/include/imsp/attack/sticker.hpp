#pragma once

#include <vector>

#include "imsp/attack/target.hpp"

namespace imsp::attack {

struct StickerSpec {
  int row = 2;
  int col = 6;
  int height = 6;
  int width = 20;
  int steps = 200;
  double step_size = 0.05;
  int restarts = 3;  // first restart starts from mid-gray, the rest uniform random
};

struct StickerResult {
  Vector patch;                      // height * width, row-major
  std::vector<char> success;         // per gallery image, deployed decision
  double error_rate = 0.0;           // fraction of the gallery accepted as the target
  double clean_error_rate = 0.0;     // same, without the patch
  double mean_attack_similarity = 0.0;
  int restart_used = 0;
};

// Pastes the patch into the region; pixels outside are untouched.
Vector apply_sticker(const Vector& x, const Vector& patch, const StickerSpec& spec, int image_width);

// One shared patch maximizing mean similarity to the target over the gallery
// by signed gradient ascent, box-constrained to [0,1].
StickerResult sticker_attack(const AttackTarget& target, const std::vector<Vector>& gallery,
                             const Vector& target_image, const StickerSpec& spec, int image_height,
                             int image_width, SeededRng& rng);

}  // namespace imsp::attack
