#include "imsp/experiment/workbench.hpp"

#include <fstream>

#include <fmt/format.h>

#include "imsp/core/hash.hpp"
#include "imsp/data/noise.hpp"
#include "imsp/nn/checkpoint.hpp"
#include "imsp/pin/dae.hpp"
#include "imsp/recognizer/metrics.hpp"

namespace imsp::exp {

namespace fs = std::filesystem;

namespace {

std::optional<nlohmann::json> read_stamp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return std::nullopt;
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

void write_stamp(const fs::path& p, const nlohmann::json& j) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", p.string()));
  out << j.dump(1) << '\n';
}

bool stamp_matches(const std::optional<nlohmann::json>& s, std::uint64_t key) {
  return s && s->value("stage_key", std::string()) == hex64(key);
}

[[noreturn]] void missing(const std::string& what, const fs::path& dir, const std::string& command) {
  throw MissingArtifact(fmt::format("{} missing or stale in {}; build it with `imsp {} --config <config> --out {}`",
                                    what, dir.string(), command, dir.string()));
}

}  // namespace

Workbench::Workbench(ExperimentConfig cfg, Logger log) : cfg_(std::move(cfg)), log_(std::move(log)) {
  cfg_.pin.components = cfg_.basis_components;
}

void Workbench::log(const std::string& msg) const {
  if (log_) log_(msg);
}

std::uint64_t Workbench::data_hash() {
  return Hasher{}
      .str(data::to_json(cfg_.data).dump())
      .u64(static_cast<std::uint64_t>(cfg_.eval_positive))
      .u64(static_cast<std::uint64_t>(cfg_.eval_negative))
      .u64(cfg_.pair_seed)
      .digest();
}

std::uint64_t Workbench::recognizer_hash() {
  nlohmann::json j = to_json(cfg_)["recognizer"];
  return Hasher{}.u64(data_hash()).str(j.dump()).u64(cfg_.recognizer_seed).f64(cfg_.calibration_tpr).digest();
}

std::uint64_t Workbench::basis_hash() {
  return Hasher{}.u64(data_hash()).u64(static_cast<std::uint64_t>(cfg_.basis_components)).digest();
}

std::uint64_t Workbench::pin_hash() {
  nlohmann::json j = pin::to_json(cfg_.pin);
  j.erase("dae_enabled");
  j.erase("mode");
  j.erase("eval_samples");
  return Hasher{}.u64(basis_hash()).str(j.dump()).digest();
}

const data::Dataset& Workbench::dataset(bool build) {
  if (data_) return *data_;
  const fs::path manifest = dir() / "manifest.json";
  const auto key = data_hash();
  const auto stamp = read_stamp(dir() / "data.stamp.json");
  if (stamp_matches(stamp, key) && fs::exists(manifest)) {
    data_ = data::regenerate(data::load_manifest(manifest), cfg_.jobs);
    log(fmt::format("dataset: loaded manifest ({} samples)", data_->images.size()));
    return *data_;
  }
  if (!build) missing("dataset manifest", dir(), "gen-data");
  fs::create_directories(dir());
  data::Dataset d = data::generate_dataset(cfg_.data, cfg_.jobs);
  SeededRng pair_rng(cfg_.pair_seed, 0);
  d.manifest.pair_seed = cfg_.pair_seed;
  d.manifest.eval_pairs = data::make_pairs(d, data::Split::eval, cfg_.eval_positive, cfg_.eval_negative, pair_rng);
  data::validate_manifest(d.manifest);
  data::save_manifest(manifest, d.manifest);
  write_stamp(dir() / "data.stamp.json",
              {{"stage_key", hex64(key)}, {"content_hash", hex64(d.manifest.content_hash)}});
  log(fmt::format("dataset: generated {} samples, {} eval pairs", d.images.size(), d.manifest.eval_pairs.size()));
  data_ = std::move(d);
  return *data_;
}

std::vector<double> calibration_scores(const data::Dataset& data, const rec::RecognizerModel& model) {
  const auto idx = data.indices(data::Split::calibration);
  std::vector<Vector> emb;
  for (std::size_t i : idx) emb.push_back(rec::embed(model, data.images[i]));
  std::vector<double> pos;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      if (data.identity(idx[a]) == data.identity(idx[b])) pos.push_back(rec::similarity(emb[a], emb[b]));
  return pos;
}

const rec::RecognizerModel& Workbench::recognizer(bool build) {
  if (recognizer_) return *recognizer_;
  const auto& d = dataset(build);
  const fs::path file = dir() / "recognizer.imnn";
  const auto key = recognizer_hash();
  const auto stamp = read_stamp(dir() / "recognizer.stamp.json");
  if (stamp_matches(stamp, key) && fs::exists(file)) {
    recognizer_ = rec::load_recognizer(file, cfg_.recognizer);
    rec_summary_.train_accuracy = stamp->value("train_accuracy", 0.0);
    rec_summary_.epochs = stamp->value("epochs", 0);
    rec_summary_.threshold = recognizer_->threshold;
    rec_summary_.calibration_tpr = stamp->value("calibration_tpr", 0.0);
    log("recognizer: loaded checkpoint");
    return *recognizer_;
  }
  if (!build) missing("recognizer checkpoint", dir(), "train-recognizer");
  std::vector<Vector> images;
  std::vector<int> labels;
  for (std::size_t i : d.indices(data::Split::recognizer_train)) {
    images.push_back(d.images[i]);
    labels.push_back(d.identity(i));
  }
  SeededRng rng(cfg_.recognizer_seed, 0);
  rec::TrainReport rep;
  rec::RecognizerModel model = rec::train_recognizer(images, labels, cfg_.recognizer, rng, &rep, cfg_.jobs);
  const auto pos = calibration_scores(d, model);
  model.threshold = rec::calibrate_threshold(pos, cfg_.calibration_tpr);
  std::size_t accepted = 0;
  for (double s : pos) accepted += s > model.threshold;
  rec_summary_ = RecognizerSummary{rep.train_accuracy, rep.epochs, model.threshold,
                                   pos.empty() ? 0.0 : static_cast<double>(accepted) / pos.size()};
  fs::create_directories(dir());
  rec::save_recognizer(file, model);
  write_stamp(dir() / "recognizer.stamp.json",
              {{"stage_key", hex64(key)},
               {"train_accuracy", rep.train_accuracy},
               {"epochs", rep.epochs},
               {"threshold", model.threshold},
               {"calibration_tpr", rec_summary_.calibration_tpr},
               {"params_hash", hex64(nn::params_hash(model.params))}});
  log(fmt::format("recognizer: {} epochs, train accuracy {:.3f}, threshold {:.4f}", rep.epochs, rep.train_accuracy,
                  model.threshold));
  recognizer_ = std::move(model);
  return *recognizer_;
}

const pca::EigenBasis& Workbench::basis(bool build) {
  if (basis_) return *basis_;
  const auto& d = dataset(build);
  const fs::path file = dir() / "basis.imsp";
  const auto key = basis_hash();
  const auto stamp = read_stamp(dir() / "basis.stamp.json");
  if (stamp_matches(stamp, key) && fs::exists(file)) {
    basis_ = pca::load_basis(file);
    log("basis: loaded");
    return *basis_;
  }
  if (!build) missing("eigenbasis", dir(), "fit-pca");
  pca::EigenBasis b = pca::fit(d.images_of(data::Split::basis_fit), cfg_.basis_components);
  fs::create_directories(dir());
  pca::save_basis(file, b);
  write_stamp(dir() / "basis.stamp.json", {{"stage_key", hex64(key)}, {"basis_hash", hex64(pca::basis_hash(b))}});
  log(fmt::format("basis: fitted {} components from {} images", b.count(),
                  d.indices(data::Split::basis_fit).size()));
  basis_ = std::move(b);
  return *basis_;
}

pin::PinModel Workbench::train_pin_stage(const pin::PinConfig& pc, const fs::path& sub, bool build,
                                         std::vector<pin::EpochStats>* curve) {
  const auto& d = dataset(build);
  const auto& b = basis(build);
  const fs::path pdir = dir() / sub;
  const auto key = Hasher{}.u64(pin_hash()).u64(pc.dae_enabled ? 1 : 0).digest();
  const auto stamp = read_stamp(pdir / "stamp.json");
  const int h = cfg_.data.render.height;
  const int w = cfg_.data.render.width;
  if (stamp_matches(stamp, key) && fs::exists(pdir / "agent.imnn")) {
    pin::PinModel m = pin::load_pin(pdir, h, w);
    m.config.mode = pc.mode;
    m.config.eval_samples = pc.eval_samples;
    if (curve && fs::exists(pdir / "reward_curve.csv")) *curve = pin::read_reward_curve(pdir / "reward_curve.csv");
    log(fmt::format("pin ({}): loaded", sub.string()));
    return m;
  }
  if (!build) missing(fmt::format("PIN checkpoint ({})", sub.string()), dir(), "train-pin");

  const auto clean = d.images_of(data::Split::pin_train);
  SeededRng rng(pc.seed, 0);
  pin::PinModel m;
  m.basis = b;
  m.config = pc;
  SeededRng init_rng = rng.derive(1);
  m.agent = pin::make_agent(pin::AgentConfig{h, w, pc.conv1, pc.conv2, pc.hidden, b.count()}, init_rng);
  if (pc.dae_enabled) {
    SeededRng dae_rng = rng.derive(2);
    std::vector<Vector> noisy;
    for (const Vector& x : clean) noisy.push_back(data::add_noise_at_intensity(x, pc.noise_intensity, dae_rng));
    m.agent.dae = pin::dae_pretrain(noisy, clean, h, w, pc.dae_epochs, dae_rng, nullptr, cfg_.jobs);
    log(fmt::format("pin ({}): DAE pretrained, mse {:.3e}", sub.string(), pin::dae_mse(*m.agent.dae, noisy, clean)));
  }
  SeededRng train_rng = rng.derive(3);
  const auto result = pin::train_pin(m.agent, clean, b, pc, train_rng, cfg_.jobs, [&](const pin::EpochStats& e) {
    log(fmt::format("pin ({}): epoch {} reward {:.4f} L0 {:.3f}", sub.string(), e.epoch, e.mean_reward,
                    e.mean_l0_fraction));
  });
  if (result.aborted) log(fmt::format("pin ({}): reward diverged, kept last good epoch", sub.string()));
  pin::save_pin(pdir, m);
  pin::write_reward_curve(pdir / "reward_curve.csv", result.curve);
  write_stamp(pdir / "stamp.json", {{"stage_key", hex64(key)},
                                    {"epochs_run", result.epochs_run},
                                    {"aborted", result.aborted},
                                    {"params_hash", hex64(nn::params_hash(m.agent.params))}});
  if (curve) *curve = result.curve;
  return m;
}

const pin::PinModel& Workbench::pin(bool build) {
  if (!pin_) {
    pin_ = train_pin_stage(cfg_.pin, cfg_.pin.dae_enabled ? "pin_dae" : "pin", build, &reward_curve_);
  }
  return *pin_;
}

const pin::PinModel& Workbench::pin_with_dae(bool build) {
  if (!pin_dae_) {
    pin::PinConfig pc = cfg_.pin;
    pc.dae_enabled = true;
    pin_dae_ = train_pin_stage(pc, "pin_dae", build, nullptr);
  }
  return *pin_dae_;
}

}  // namespace imsp::exp
