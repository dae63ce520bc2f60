#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imsp/core/linalg.hpp"
#include "imsp/core/rng.hpp"
#include "imsp/data/synthetic.hpp"

namespace imsp::data {

inline constexpr int kManifestSchemaVersion = 1;

enum class Split { recognizer_train, calibration, eval, basis_fit, pin_train };

std::string to_string(Split split);
Split parse_split(const std::string& name);

struct DatasetConfig {
  std::uint64_t seed = 7;
  int identities = 16;
  // Labeled images per identity, split train / calibration / eval.
  int train_per_identity = 18;
  int calibration_per_identity = 6;
  int eval_per_identity = 16;
  // Auxiliary clean pools, disjoint from everything above.
  int basis_fit_per_identity = 20;
  int pin_train_per_identity = 20;
  RenderConfig render;

  int labeled_per_identity() const { return train_per_identity + calibration_per_identity + eval_per_identity; }
  int per_identity() const { return labeled_per_identity() + basis_fit_per_identity + pin_train_per_identity; }
};

struct SampleEntry {
  int identity = 0;
  int ordinal = 0;  // index within the identity's render sequence
  Split split = Split::recognizer_train;
  std::uint64_t hash = 0;
};

struct Pair {
  std::size_t a = 0;  // probe (the perturbed image in attack protocols)
  std::size_t b = 0;  // reference
  bool positive = false;
};

struct Manifest {
  int schema_version = kManifestSchemaVersion;
  DatasetConfig config;
  std::vector<SampleEntry> samples;
  std::uint64_t content_hash = 0;
  std::uint64_t pair_seed = 0;
  std::vector<Pair> eval_pairs;
};

struct Dataset {
  Manifest manifest;
  std::vector<IdentityLatent> latents;
  std::vector<Vector> images;  // parallel to manifest.samples

  std::vector<std::size_t> indices(Split split) const;
  std::vector<Vector> images_of(Split split) const;
  int identity(std::size_t sample) const { return manifest.samples[sample].identity; }
};

// Renders every split from the config seed alone.
Dataset generate_dataset(const DatasetConfig& cfg, unsigned jobs = 0);

// Regenerates and checks every per-sample hash against the manifest.
Dataset regenerate(const Manifest& manifest, unsigned jobs = 0);

// Positive pairs: same identity, distinct images; negative pairs: distinct
// identities. Pairs are distinct and drawn only from `split`.
std::vector<Pair> make_pairs(const Dataset& data, Split split, int n_pos, int n_neg, SeededRng& rng);

// Throws if a pair touches a basis-fit or pin-train image, crosses splits, or
// violates its label.
void validate_manifest(const Manifest& manifest);

nlohmann::json to_json(const DatasetConfig& cfg);
DatasetConfig dataset_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);

void save_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace imsp::data
