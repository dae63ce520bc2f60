#include "imsp/attack/adversarial_io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "imsp/data/pgm.hpp"

namespace imsp::attack {

void save_adversarial(const std::filesystem::path& dir, const std::string& stem, const Vector& image, int height,
                      int width, const nlohmann::json& sidecar) {
  std::filesystem::create_directories(dir);
  data::write_pgm(dir / (stem + ".pgm"), data::Image{height, width, image});
  std::ofstream out(dir / (stem + ".json"));
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", (dir / (stem + ".json")).string()));
  out << sidecar.dump(1) << '\n';
}

nlohmann::json sidecar_json(const std::string& attack, const AttackConfig& cfg, const AttackResult& result,
                            bool success) {
  return {{"attack", attack},
          {"config",
           {{"intensity", cfg.intensity},
            {"epsilon", cfg.epsilon},
            {"steps", cfg.steps},
            {"step_size", cfg.step_size},
            {"objective", to_string(cfg.objective)}}},
          {"seed", cfg.seed},
          {"intensity_pre_clip", result.intensity_pre_clip},
          {"intensity_post_clip", result.intensity_post_clip},
          {"linf", result.linf},
          {"success", success},
          {"queries", result.gradient_queries},
          {"flagged", result.flagged},
          {"note", result.note}};
}

}  // namespace imsp::attack
