#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "imsp/data/manifest.hpp"
#include "imsp/data/noise.hpp"
#include "imsp/data/pgm.hpp"

namespace imsp::data {
namespace {

namespace fs = std::filesystem;

DatasetConfig tiny_config() {
  DatasetConfig c;
  c.identities = 4;
  c.train_per_identity = 3;
  c.calibration_per_identity = 2;
  c.eval_per_identity = 4;
  c.basis_fit_per_identity = 2;
  c.pin_train_per_identity = 2;
  c.render.height = 12;
  c.render.width = 10;
  return c;
}

TEST(Pgm, RoundTripQuantizesToLevels) {
  SeededRng rng(1);
  Image img{5, 7, Vector(35)};
  for (int i = 0; i < 35; ++i) img.pixels(i) = rng.uniform();
  img.pixels(0) = 0.0;
  img.pixels(1) = 1.0;
  const Image back = decode_pgm(encode_pgm(img));
  EXPECT_EQ(back.height, 5);
  EXPECT_EQ(back.width, 7);
  EXPECT_LE((back.pixels - img.pixels).cwiseAbs().maxCoeff(), 0.5 / 255 + 1e-12);
  EXPECT_EQ(back.pixels(0), 0.0);
  EXPECT_EQ(back.pixels(1), 1.0);
  // A second trip is exact.
  EXPECT_EQ(decode_pgm(encode_pgm(back)).pixels, back.pixels);

  const fs::path p = fs::temp_directory_path() / "imsp_rt.pgm";
  write_pgm(p, img);
  EXPECT_EQ(read_pgm(p).pixels, back.pixels);
  fs::remove(p);
}

TEST(Pgm, HeaderWithComments) {
  std::string bytes = "P5\n# made by hand\n2 1\n255\n";
  bytes += static_cast<char>(0);
  bytes += static_cast<char>(255);
  const Image img = decode_pgm(bytes);
  EXPECT_EQ(img.width, 2);
  EXPECT_EQ(img.pixels(1), 1.0);
}

TEST(Pgm, MalformedInputReportsOffset) {
  EXPECT_THROW(decode_pgm("P2\n2 1\n255\n"), PgmError);
  EXPECT_THROW(decode_pgm("P5\n2 1\n65535\n"), PgmError);
  std::string truncated = "P5\n3 2\n255\n";
  truncated += std::string(4, '\x10');
  try {
    decode_pgm(truncated);
    FAIL() << "truncated payload accepted";
  } catch (const PgmError& e) {
    EXPECT_GE(e.offset(), 10u);
  }
  EXPECT_THROW(read_pgm(fs::temp_directory_path() / "imsp_no_such_file.pgm"), std::exception);
}

TEST(Noise, ExactIntensityInsideMask) {
  SeededRng rng(2);
  for (int s = 0; s < 50; ++s) {
    Vector x(120);
    for (int i = 0; i < 120; ++i) x(i) = rng.uniform();
    const RegionMask m = band_mask(static_cast<Band>(s % 3), 12, 10);
    const double level = 0.01 + 0.002 * s;
    const Vector eta = scaled_noise(x, level, rng, &m);
    EXPECT_NEAR(intensity(eta, x), level, 1e-12);
    EXPECT_EQ(eta.cwiseProduct(Vector::Ones(120) - m.mask).cwiseAbs().maxCoeff(), 0.0);
    const Vector y = add_noise_at_intensity(x, level, rng, &m);
    EXPECT_GE(y.minCoeff(), 0.0);
    EXPECT_LE(y.maxCoeff(), 1.0);
  }
}

TEST(Noise, BandsPartitionTheImage) {
  for (int h : {9, 10, 11, 32}) {
    Vector total = Vector::Zero(h * 7);
    for (Band b : {Band::top, Band::middle, Band::bottom}) {
      const RegionMask m = band_mask(b, h, 7);
      EXPECT_EQ(m.name, to_string(b));
      total += m.mask;
    }
    EXPECT_EQ(total, Vector::Ones(h * 7));
    // Top band rows are [0, floor(h/3)).
    const RegionMask top = band_mask(Band::top, h, 7);
    EXPECT_EQ(top.mask.sum(), 7.0 * (h / 3));
  }
}

TEST(Noise, RectMaskBoundsChecked) {
  const RegionMask r = rect_mask(2, 3, 4, 5, 12, 10);
  EXPECT_EQ(r.mask.sum(), 20.0);
  EXPECT_EQ(r.mask(2 * 10 + 3), 1.0);
  EXPECT_EQ(r.mask(2 * 10 + 8), 0.0);
  EXPECT_THROW(rect_mask(10, 0, 4, 2, 12, 10), std::invalid_argument);
  EXPECT_THROW(rect_mask(0, -1, 1, 1, 12, 10), std::invalid_argument);
}

TEST(Noise, ZeroImageRejected) {
  SeededRng rng(3);
  EXPECT_THROW(scaled_noise(Vector::Zero(10), 0.1, rng), std::invalid_argument);
}

TEST(Synthetic, RenderingIsPureAndBounded) {
  const DatasetConfig c = tiny_config();
  SeededRng rng(4);
  const IdentityLatent lat = sample_latent(3, c.render, rng);
  EXPECT_EQ(lat.blobs.size(), 6u);
  const Vector a = render_identity_sample(lat, c.render, 99);
  EXPECT_EQ(a, render_identity_sample(lat, c.render, 99));
  EXPECT_NE(a, render_identity_sample(lat, c.render, 100));
  EXPECT_GE(a.minCoeff(), 0.0);
  EXPECT_LE(a.maxCoeff(), 1.0);
  EXPECT_EQ(render_canonical(lat, c.render), render_canonical(lat, c.render));
}

TEST(Synthetic, BlobsStayOutOfTheBottomBand) {
  RenderConfig rc;
  SeededRng rng(5);
  for (int id = 0; id < 30; ++id) {
    for (const Blob& b : sample_latent(id, rc, rng).blobs) {
      EXPECT_LE(b.row, (1.0 - rc.bottom_free_fraction) * rc.height);
      EXPECT_GE(std::abs(b.amplitude), rc.amplitude_min);
      EXPECT_LE(std::abs(b.amplitude), rc.amplitude_max);
    }
  }
}

TEST(Dataset, DeterministicAndSplitSized) {
  const DatasetConfig c = tiny_config();
  const Dataset a = generate_dataset(c, 1);
  const Dataset b = generate_dataset(c, 2);
  EXPECT_EQ(a.manifest.content_hash, b.manifest.content_hash);
  ASSERT_EQ(a.images.size(), static_cast<std::size_t>(c.identities * c.per_identity()));
  for (std::size_t i = 0; i < a.images.size(); ++i) EXPECT_EQ(a.images[i], b.images[i]);
  EXPECT_EQ(a.indices(Split::eval).size(), 16u);
  EXPECT_EQ(a.indices(Split::basis_fit).size(), 8u);
  EXPECT_EQ(a.images_of(Split::calibration).size(), 8u);

  DatasetConfig other = c;
  other.seed += 1;
  EXPECT_NE(generate_dataset(other, 1).manifest.content_hash, a.manifest.content_hash);
}

TEST(Dataset, PairsRespectLabelsAndSplit) {
  const Dataset d = generate_dataset(tiny_config(), 1);
  SeededRng rng(6);
  const auto pairs = make_pairs(d, Split::eval, 20, 30, rng);
  ASSERT_EQ(pairs.size(), 50u);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Pair& p : pairs) {
    EXPECT_NE(p.a, p.b);
    EXPECT_EQ(d.manifest.samples[p.a].split, Split::eval);
    EXPECT_EQ(d.manifest.samples[p.b].split, Split::eval);
    EXPECT_EQ(d.identity(p.a) == d.identity(p.b), p.positive);
    EXPECT_TRUE(seen.insert({std::min(p.a, p.b), std::max(p.a, p.b)}).second);
  }
  // 4 ids x C(4,2) = 24 positive pairs exist; asking for more fails.
  EXPECT_THROW(make_pairs(d, Split::eval, 25, 0, rng), std::invalid_argument);
}

TEST(Manifest, SaveLoadRegenerate) {
  Dataset d = generate_dataset(tiny_config(), 1);
  SeededRng rng(7);
  d.manifest.eval_pairs = make_pairs(d, Split::eval, 5, 5, rng);
  validate_manifest(d.manifest);
  const fs::path p = fs::temp_directory_path() / "imsp_manifest.json";
  save_manifest(p, d.manifest);
  const Manifest m = load_manifest(p);
  EXPECT_EQ(m.content_hash, d.manifest.content_hash);
  EXPECT_EQ(m.eval_pairs.size(), 10u);
  const Dataset r = regenerate(m, 1);
  EXPECT_EQ(r.images.back(), d.images.back());

  Manifest tampered = m;
  tampered.samples[3].hash ^= 1;
  EXPECT_THROW(regenerate(tampered, 1), std::runtime_error);
  fs::remove(p);
}

TEST(Manifest, ValidationCatchesLeaks) {
  Dataset d = generate_dataset(tiny_config(), 1);
  const auto eval = d.indices(Split::eval);
  const auto fit = d.indices(Split::basis_fit);
  Manifest m = d.manifest;
  m.eval_pairs = {Pair{eval[0], fit[0], false}};
  EXPECT_THROW(validate_manifest(m), std::runtime_error);
  // Wrong label.
  m.eval_pairs = {Pair{eval[0], eval[1], d.identity(eval[0]) != d.identity(eval[1])}};
  EXPECT_THROW(validate_manifest(m), std::runtime_error);
  // Schema version.
  nlohmann::json j = to_json(d.manifest);
  j["schema_version"] = 99;
  EXPECT_THROW(manifest_from_json(j), std::invalid_argument);
}

TEST(Manifest, ConfigJsonRoundTrip) {
  DatasetConfig c = tiny_config();
  c.render.gratings = 2;
  c.render.texture_amplitude = 0.03;
  const DatasetConfig back = dataset_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(parse_split(to_string(Split::pin_train)), Split::pin_train);
  EXPECT_THROW(parse_split("holdout"), std::invalid_argument);
}

}  // namespace
}  // namespace imsp::data
