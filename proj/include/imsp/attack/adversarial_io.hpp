#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "imsp/attack/gradient_attacks.hpp"

namespace imsp::attack {

// Writes <stem>.pgm and <stem>.json (config, seed, realized budget, success,
// query count).
void save_adversarial(const std::filesystem::path& dir, const std::string& stem, const Vector& image, int height,
                      int width, const nlohmann::json& sidecar);

nlohmann::json sidecar_json(const std::string& attack, const AttackConfig& cfg, const AttackResult& result,
                            bool success);

}  // namespace imsp::attack
