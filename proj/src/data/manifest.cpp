#include "imsp/data/manifest.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "imsp/core/hash.hpp"
#include "imsp/core/parallel.hpp"

namespace imsp::data {

std::string to_string(Split split) {
  switch (split) {
    case Split::recognizer_train: return "recognizer_train";
    case Split::calibration: return "calibration";
    case Split::eval: return "eval";
    case Split::basis_fit: return "basis_fit";
    case Split::pin_train: return "pin_train";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  for (Split s : {Split::recognizer_train, Split::calibration, Split::eval, Split::basis_fit, Split::pin_train})
    if (to_string(s) == name) return s;
  throw std::invalid_argument(fmt::format("unknown split '{}'", name));
}

std::vector<std::size_t> Dataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < manifest.samples.size(); ++i)
    if (manifest.samples[i].split == split) out.push_back(i);
  return out;
}

std::vector<Vector> Dataset::images_of(Split split) const {
  std::vector<Vector> out;
  for (std::size_t i : indices(split)) out.push_back(images[i]);
  return out;
}

namespace {

Split split_for(const DatasetConfig& cfg, int ordinal) {
  int edge = cfg.train_per_identity;
  if (ordinal < edge) return Split::recognizer_train;
  if (ordinal < (edge += cfg.calibration_per_identity)) return Split::calibration;
  if (ordinal < (edge += cfg.eval_per_identity)) return Split::eval;
  if (ordinal < (edge += cfg.basis_fit_per_identity)) return Split::basis_fit;
  return Split::pin_train;
}

std::uint64_t variation_seed(std::uint64_t seed, int identity, int ordinal) {
  return mix64(mix64(seed ^ 0x6a09e667f3bcc908ULL) + static_cast<std::uint64_t>(identity) * 0x10000 +
               static_cast<std::uint64_t>(ordinal));
}

std::uint64_t image_hash(const Vector& v) { return Hasher{}.vec(v).digest(); }

}  // namespace

Dataset generate_dataset(const DatasetConfig& cfg, unsigned jobs) {
  if (cfg.identities < 2) throw std::invalid_argument("dataset needs at least 2 identities");
  if (cfg.train_per_identity < 1 || cfg.calibration_per_identity < 0 || cfg.eval_per_identity < 2 ||
      cfg.basis_fit_per_identity < 0 || cfg.pin_train_per_identity < 0)
    throw std::invalid_argument("dataset split sizes out of range");
  Dataset d;
  d.manifest.config = cfg;
  SeededRng latent_rng(cfg.seed, 1);
  for (int id = 0; id < cfg.identities; ++id) {
    SeededRng r = latent_rng.derive(static_cast<std::uint64_t>(id));
    d.latents.push_back(sample_latent(id, cfg.render, r));
  }
  const int per = cfg.per_identity();
  const std::size_t total = static_cast<std::size_t>(cfg.identities) * per;
  d.images.resize(total);
  d.manifest.samples.resize(total);
  parallel_for(
      total,
      [&](std::size_t i) {
        const int id = static_cast<int>(i) / per;
        const int ordinal = static_cast<int>(i) % per;
        d.images[i] = render_identity_sample(d.latents[id], cfg.render, variation_seed(cfg.seed, id, ordinal));
        d.manifest.samples[i] = SampleEntry{id, ordinal, split_for(cfg, ordinal), image_hash(d.images[i])};
      },
      jobs);
  Hasher h;
  h.str(to_json(cfg).dump());
  for (const auto& s : d.manifest.samples) h.u64(s.hash);
  d.manifest.content_hash = h.digest();
  return d;
}

Dataset regenerate(const Manifest& manifest, unsigned jobs) {
  if (manifest.schema_version != kManifestSchemaVersion)
    throw std::invalid_argument(fmt::format("manifest schema version {} unsupported (expected {})",
                                            manifest.schema_version, kManifestSchemaVersion));
  Dataset d = generate_dataset(manifest.config, jobs);
  if (d.manifest.samples.size() != manifest.samples.size())
    throw std::runtime_error("regenerated dataset size differs from manifest");
  for (std::size_t i = 0; i < manifest.samples.size(); ++i)
    if (d.manifest.samples[i].hash != manifest.samples[i].hash)
      throw std::runtime_error(fmt::format("sample {} hash mismatch: manifest {}, regenerated {}", i,
                                           hex64(manifest.samples[i].hash), hex64(d.manifest.samples[i].hash)));
  d.manifest.pair_seed = manifest.pair_seed;
  d.manifest.eval_pairs = manifest.eval_pairs;
  return d;
}

std::vector<Pair> make_pairs(const Dataset& data, Split split, int n_pos, int n_neg, SeededRng& rng) {
  if (n_pos < 0 || n_neg < 0) throw std::invalid_argument("pair counts must be non-negative");
  std::vector<std::vector<std::size_t>> by_id(static_cast<std::size_t>(data.manifest.config.identities));
  for (std::size_t i : data.indices(split)) by_id[static_cast<std::size_t>(data.identity(i))].push_back(i);

  std::size_t pos_capacity = 0;
  std::size_t total = 0;
  std::vector<std::size_t> usable;
  for (std::size_t id = 0; id < by_id.size(); ++id) {
    const std::size_t k = by_id[id].size();
    pos_capacity += k * (k - (k > 0 ? 1 : 0)) / 2;
    total += k;
    if (k >= 2) usable.push_back(id);
  }
  std::size_t same = 0;
  for (const auto& v : by_id) same += v.size() * v.size();
  const std::size_t neg_capacity = (total * total - same) / 2;
  if (static_cast<std::size_t>(n_pos) > pos_capacity || static_cast<std::size_t>(n_neg) > neg_capacity)
    throw std::invalid_argument(fmt::format("split {} supports {} positive / {} negative pairs, {} / {} requested",
                                            to_string(split), pos_capacity, neg_capacity, n_pos, n_neg));

  std::vector<Pair> pairs;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  auto key = [](std::size_t a, std::size_t b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  while (static_cast<int>(pairs.size()) < n_pos) {
    const auto& imgs = by_id[usable[rng.uniform_index(usable.size())]];
    const std::size_t i = rng.uniform_index(imgs.size());
    std::size_t j = rng.uniform_index(imgs.size() - 1);
    if (j >= i) ++j;
    if (seen.insert(key(imgs[i], imgs[j])).second) pairs.push_back(Pair{imgs[i], imgs[j], true});
  }
  std::vector<std::size_t> nonempty;
  for (std::size_t id = 0; id < by_id.size(); ++id)
    if (!by_id[id].empty()) nonempty.push_back(id);
  int negatives = 0;
  while (negatives < n_neg) {
    const std::size_t ia = rng.uniform_index(nonempty.size());
    std::size_t ib = rng.uniform_index(nonempty.size() - 1);
    if (ib >= ia) ++ib;
    const auto& A = by_id[nonempty[ia]];
    const auto& B = by_id[nonempty[ib]];
    const std::size_t a = A[rng.uniform_index(A.size())];
    const std::size_t b = B[rng.uniform_index(B.size())];
    if (seen.insert(key(a, b)).second) {
      pairs.push_back(Pair{a, b, false});
      ++negatives;
    }
  }
  return pairs;
}

void validate_manifest(const Manifest& m) {
  const auto n = m.samples.size();
  for (std::size_t k = 0; k < m.eval_pairs.size(); ++k) {
    const Pair& p = m.eval_pairs[k];
    if (p.a >= n || p.b >= n || p.a == p.b) throw std::runtime_error(fmt::format("pair {} has bad indices", k));
    const auto& a = m.samples[p.a];
    const auto& b = m.samples[p.b];
    if (a.split != Split::eval || b.split != Split::eval)
      throw std::runtime_error(fmt::format("pair {} uses a non-eval image ({} / {})", k, to_string(a.split),
                                           to_string(b.split)));
    if ((a.identity == b.identity) != p.positive)
      throw std::runtime_error(fmt::format("pair {} label disagrees with identities", k));
  }
}

nlohmann::json to_json(const DatasetConfig& c) {
  return {
      {"seed", c.seed},
      {"identities", c.identities},
      {"train_per_identity", c.train_per_identity},
      {"calibration_per_identity", c.calibration_per_identity},
      {"eval_per_identity", c.eval_per_identity},
      {"basis_fit_per_identity", c.basis_fit_per_identity},
      {"pin_train_per_identity", c.pin_train_per_identity},
      {"height", c.render.height},
      {"width", c.render.width},
      {"blobs", c.render.blobs},
      {"bottom_free_fraction", c.render.bottom_free_fraction},
      {"max_shift", c.render.max_shift},
      {"contrast_jitter", c.render.contrast_jitter},
      {"pixel_noise", c.render.pixel_noise},
      {"amplitude_min", c.render.amplitude_min},
      {"amplitude_max", c.render.amplitude_max},
      {"gratings", c.render.gratings},
      {"texture_amplitude", c.render.texture_amplitude},
      {"texture_freq_min", c.render.texture_freq_min},
      {"texture_freq_max", c.render.texture_freq_max},
  };
}

DatasetConfig dataset_config_from_json(const nlohmann::json& j) {
  DatasetConfig c;
  c.seed = j.value("seed", c.seed);
  c.identities = j.value("identities", c.identities);
  c.train_per_identity = j.value("train_per_identity", c.train_per_identity);
  c.calibration_per_identity = j.value("calibration_per_identity", c.calibration_per_identity);
  c.eval_per_identity = j.value("eval_per_identity", c.eval_per_identity);
  c.basis_fit_per_identity = j.value("basis_fit_per_identity", c.basis_fit_per_identity);
  c.pin_train_per_identity = j.value("pin_train_per_identity", c.pin_train_per_identity);
  c.render.height = j.value("height", c.render.height);
  c.render.width = j.value("width", c.render.width);
  c.render.blobs = j.value("blobs", c.render.blobs);
  c.render.bottom_free_fraction = j.value("bottom_free_fraction", c.render.bottom_free_fraction);
  c.render.max_shift = j.value("max_shift", c.render.max_shift);
  c.render.contrast_jitter = j.value("contrast_jitter", c.render.contrast_jitter);
  c.render.pixel_noise = j.value("pixel_noise", c.render.pixel_noise);
  c.render.amplitude_min = j.value("amplitude_min", c.render.amplitude_min);
  c.render.amplitude_max = j.value("amplitude_max", c.render.amplitude_max);
  c.render.gratings = j.value("gratings", c.render.gratings);
  c.render.texture_amplitude = j.value("texture_amplitude", c.render.texture_amplitude);
  c.render.texture_freq_min = j.value("texture_freq_min", c.render.texture_freq_min);
  c.render.texture_freq_max = j.value("texture_freq_max", c.render.texture_freq_max);
  return c;
}

nlohmann::json to_json(const Manifest& m) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : m.samples)
    samples.push_back({{"identity", s.identity}, {"ordinal", s.ordinal}, {"split", to_string(s.split)},
                       {"hash", hex64(s.hash)}});
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : m.eval_pairs) pairs.push_back({p.a, p.b, p.positive ? 1 : 0});
  return {{"schema_version", m.schema_version},
          {"config", to_json(m.config)},
          {"content_hash", hex64(m.content_hash)},
          {"pair_seed", m.pair_seed},
          {"samples", samples},
          {"eval_pairs", pairs}};
}

Manifest manifest_from_json(const nlohmann::json& j) {
  Manifest m;
  m.schema_version = j.at("schema_version").get<int>();
  if (m.schema_version != kManifestSchemaVersion)
    throw std::invalid_argument(fmt::format("manifest schema version {} unsupported (expected {})",
                                            m.schema_version, kManifestSchemaVersion));
  m.config = dataset_config_from_json(j.at("config"));
  m.content_hash = parse_hex64(j.at("content_hash").get<std::string>());
  m.pair_seed = j.value("pair_seed", std::uint64_t{0});
  for (const auto& s : j.at("samples"))
    m.samples.push_back(SampleEntry{s.at("identity").get<int>(), s.at("ordinal").get<int>(),
                                    parse_split(s.at("split").get<std::string>()),
                                    parse_hex64(s.at("hash").get<std::string>())});
  for (const auto& p : j.value("eval_pairs", nlohmann::json::array()))
    m.eval_pairs.push_back(Pair{p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>(), p.at(2).get<int>() != 0});
  return m;
}

void save_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << to_json(m).dump(1) << '\n';
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  return manifest_from_json(nlohmann::json::parse(in));
}

}  // namespace imsp::data
