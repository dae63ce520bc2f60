#include "imsp/experiment/config.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "imsp/core/hash.hpp"
#include "imsp/core/rng.hpp"

namespace imsp::exp {

void ExperimentConfig::reseed(std::uint64_t seed) {
  data.seed = mix64(seed ^ 0x01);
  pin.seed = mix64(seed ^ 0x02);
  pair_seed = mix64(seed ^ 0x03);
  recognizer_seed = mix64(seed ^ 0x04);
  eval_seed = mix64(seed ^ 0x05);
  attack_seed = mix64(seed ^ 0x06);
}

namespace {

nlohmann::json recognizer_json(const rec::RecognizerConfig& c) {
  return {{"conv1", c.conv1},         {"conv2", c.conv2},
          {"hidden", c.hidden},       {"embed_dim", c.embed_dim},
          {"epochs", c.epochs},       {"batch", c.batch},
          {"lr", c.lr},               {"momentum", c.momentum},
          {"weight_decay", c.weight_decay}, {"target_accuracy", c.target_accuracy},
          {"min_accuracy", c.min_accuracy}, {"min_epochs", c.min_epochs}};
}

rec::RecognizerConfig recognizer_from(const nlohmann::json& j, int h, int w) {
  rec::RecognizerConfig c;
  c.height = h;
  c.width = w;
  c.conv1 = j.value("conv1", c.conv1);
  c.conv2 = j.value("conv2", c.conv2);
  c.hidden = j.value("hidden", c.hidden);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.epochs = j.value("epochs", c.epochs);
  c.batch = j.value("batch", c.batch);
  c.lr = j.value("lr", c.lr);
  c.momentum = j.value("momentum", c.momentum);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.target_accuracy = j.value("target_accuracy", c.target_accuracy);
  c.min_accuracy = j.value("min_accuracy", c.min_accuracy);
  c.min_epochs = j.value("min_epochs", c.min_epochs);
  return c;
}

nlohmann::json attacks_json(const AttackSuiteConfig& a) {
  return {{"intensity", a.intensity},
          {"ifgsm_steps", a.ifgsm_steps},
          {"pgd_steps", a.pgd_steps},
          {"pgd_high_steps", a.pgd_high_steps},
          {"deepfool_iters", a.deepfool_iters},
          {"deepfool_overshoot", a.deepfool_overshoot},
          {"table_pairs", a.table_pairs},
          {"attacks", a.attacks},
          {"protocol", a.protocol},
          {"classical_small_k", a.classical_small_k},
          {"classical_large_k", a.classical_large_k},
          {"sticker",
           {{"row", a.sticker.row},
            {"col", a.sticker.col},
            {"height", a.sticker.height},
            {"width", a.sticker.width},
            {"steps", a.sticker.steps},
            {"step_size", a.sticker.step_size},
            {"restarts", a.sticker.restarts}}},
          {"sticker_gallery", a.sticker_gallery},
          {"blackbox",
           {{"iterations", a.blackbox.iterations},
            {"checkpoints", a.blackbox.checkpoints},
            {"step", a.blackbox.step},
            {"contraction", a.blackbox.contraction},
            {"bootstrap_budget", a.blackbox.bootstrap_budget}}},
          {"blackbox_pairs", a.blackbox_pairs},
          {"blackbox_threshold", a.blackbox_threshold},
          {"audit_pairs", a.audit_pairs},
          {"sweep", a.sweep},
          {"search_epsilon", a.search_epsilon},
          {"search_threshold", a.search_threshold},
          {"search_samples", a.search_samples},
          {"search_pairs", a.search_pairs}};
}

AttackSuiteConfig attacks_from(const nlohmann::json& j) {
  AttackSuiteConfig a;
  a.intensity = j.value("intensity", a.intensity);
  a.ifgsm_steps = j.value("ifgsm_steps", a.ifgsm_steps);
  a.pgd_steps = j.value("pgd_steps", a.pgd_steps);
  a.pgd_high_steps = j.value("pgd_high_steps", a.pgd_high_steps);
  a.deepfool_iters = j.value("deepfool_iters", a.deepfool_iters);
  a.deepfool_overshoot = j.value("deepfool_overshoot", a.deepfool_overshoot);
  a.table_pairs = j.value("table_pairs", a.table_pairs);
  a.attacks = j.value("attacks", a.attacks);
  a.protocol = j.value("protocol", a.protocol);
  if (a.protocol != "offline" && a.protocol != "online" && a.protocol != "both")
    throw std::invalid_argument(fmt::format("attacks.protocol must be offline, online or both, not '{}'", a.protocol));
  a.classical_small_k = j.value("classical_small_k", a.classical_small_k);
  a.classical_large_k = j.value("classical_large_k", a.classical_large_k);
  if (j.contains("sticker")) {
    const auto& s = j["sticker"];
    a.sticker.row = s.value("row", a.sticker.row);
    a.sticker.col = s.value("col", a.sticker.col);
    a.sticker.height = s.value("height", a.sticker.height);
    a.sticker.width = s.value("width", a.sticker.width);
    a.sticker.steps = s.value("steps", a.sticker.steps);
    a.sticker.step_size = s.value("step_size", a.sticker.step_size);
    a.sticker.restarts = s.value("restarts", a.sticker.restarts);
  }
  a.sticker_gallery = j.value("sticker_gallery", a.sticker_gallery);
  if (j.contains("blackbox")) {
    const auto& b = j["blackbox"];
    a.blackbox.iterations = b.value("iterations", a.blackbox.iterations);
    a.blackbox.checkpoints = b.value("checkpoints", a.blackbox.checkpoints);
    a.blackbox.step = b.value("step", a.blackbox.step);
    a.blackbox.contraction = b.value("contraction", a.blackbox.contraction);
    a.blackbox.bootstrap_budget = b.value("bootstrap_budget", a.blackbox.bootstrap_budget);
  }
  a.blackbox_pairs = j.value("blackbox_pairs", a.blackbox_pairs);
  a.blackbox_threshold = j.value("blackbox_threshold", a.blackbox_threshold);
  a.audit_pairs = j.value("audit_pairs", a.audit_pairs);
  a.sweep = j.value("sweep", a.sweep);
  a.search_epsilon = j.value("search_epsilon", a.search_epsilon);
  a.search_threshold = j.value("search_threshold", a.search_threshold);
  a.search_samples = j.value("search_samples", a.search_samples);
  a.search_pairs = j.value("search_pairs", a.search_pairs);
  return a;
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"schema_version", c.schema_version},
          {"data", data::to_json(c.data)},
          {"recognizer", recognizer_json(c.recognizer)},
          {"pin", pin::to_json(c.pin)},
          {"basis_components", c.basis_components},
          {"eval_positive", c.eval_positive},
          {"eval_negative", c.eval_negative},
          {"pair_seed", c.pair_seed},
          {"recognizer_seed", c.recognizer_seed},
          {"eval_seed", c.eval_seed},
          {"attack_seed", c.attack_seed},
          {"calibration_tpr", c.calibration_tpr},
          {"subspace",
           {{"samples", c.subspace.samples},
            {"intensity", c.subspace.intensity},
            {"components", c.subspace.components},
            {"bins", c.subspace.bins}}},
          {"attacks", attacks_json(c.attacks)},
          {"out_dir", c.out_dir.string()},
          {"jobs", c.jobs}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.schema_version = j.value("schema_version", kConfigSchemaVersion);
  if (c.schema_version != kConfigSchemaVersion)
    throw std::invalid_argument(
        fmt::format("config schema_version {} unsupported (expected {})", c.schema_version, kConfigSchemaVersion));
  if (j.contains("data")) c.data = data::dataset_config_from_json(j["data"]);
  c.recognizer = recognizer_from(j.value("recognizer", nlohmann::json::object()), c.data.render.height,
                                 c.data.render.width);
  if (j.contains("pin")) c.pin = pin::pin_config_from_json(j["pin"]);
  c.basis_components = j.value("basis_components", c.basis_components);
  c.pin.components = c.basis_components;
  c.eval_positive = j.value("eval_positive", c.eval_positive);
  c.eval_negative = j.value("eval_negative", c.eval_negative);
  c.pair_seed = j.value("pair_seed", c.pair_seed);
  c.recognizer_seed = j.value("recognizer_seed", c.recognizer_seed);
  c.eval_seed = j.value("eval_seed", c.eval_seed);
  c.attack_seed = j.value("attack_seed", c.attack_seed);
  c.calibration_tpr = j.value("calibration_tpr", c.calibration_tpr);
  if (j.contains("subspace")) {
    const auto& s = j["subspace"];
    c.subspace.samples = s.value("samples", c.subspace.samples);
    c.subspace.intensity = s.value("intensity", c.subspace.intensity);
    c.subspace.components = s.value("components", c.subspace.components);
    c.subspace.bins = s.value("bins", c.subspace.bins);
  }
  if (j.contains("attacks")) c.attacks = attacks_from(j["attacks"]);
  c.out_dir = j.value("out_dir", c.out_dir.string());
  c.jobs = j.value("jobs", c.jobs);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read config {}", path.string()));
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(fmt::format("config {}: {}", path.string(), e.what()));
  }
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << to_json(cfg).dump(1) << '\n';
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  nlohmann::json j = to_json(cfg);
  j.erase("out_dir");
  j.erase("jobs");
  return Hasher{}.str(j.dump()).digest();
}

}  // namespace imsp::exp
