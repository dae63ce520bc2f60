#include <gtest/gtest.h>

#include <cmath>

#include "imsp/experiment/config.hpp"
#include "imsp/experiment/experiments.hpp"
#include "imsp/experiment/workbench.hpp"

namespace imsp::exp {
namespace {

namespace fs = std::filesystem;

// Small enough to train every stage in a few seconds.
ExperimentConfig tiny_config(const fs::path& dir) {
  ExperimentConfig c;
  c.data.identities = 4;
  c.data.train_per_identity = 8;
  c.data.calibration_per_identity = 3;
  c.data.eval_per_identity = 4;
  c.data.basis_fit_per_identity = 4;
  c.data.pin_train_per_identity = 4;
  c.data.render.height = 8;
  c.data.render.width = 8;
  c.data.render.blobs = 3;
  c.recognizer.height = 8;
  c.recognizer.width = 8;
  c.recognizer.conv1 = 2;
  c.recognizer.conv2 = 3;
  c.recognizer.hidden = 8;
  c.recognizer.embed_dim = 4;
  c.recognizer.epochs = 5;
  c.recognizer.min_epochs = 1;
  c.recognizer.min_accuracy = 0.0;
  c.basis_components = 10;
  c.pin.epochs = 2;
  c.pin.conv1 = 2;
  c.pin.conv2 = 2;
  c.pin.hidden = 6;
  c.pin.batch = 8;
  c.eval_positive = 6;
  c.eval_negative = 6;
  c.out_dir = dir;
  c.jobs = 1;
  return c;
}

TEST(Config, JsonRoundTripAndHash) {
  ExperimentConfig c;
  c.attacks.attacks = {"fgsm", "pgd"};
  c.attacks.sticker.width = 17;
  c.pin.lambda = 0.02;
  const ExperimentConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));

  ExperimentConfig moved = c;
  moved.out_dir = "elsewhere";
  moved.jobs = 7;
  EXPECT_EQ(config_hash(moved), config_hash(c));
  ExperimentConfig changed = c;
  changed.attacks.intensity = 0.05;
  EXPECT_NE(config_hash(changed), config_hash(c));

  const fs::path p = fs::temp_directory_path() / "imsp_cfg.json";
  save_config(p, c);
  EXPECT_EQ(config_hash(load_config(p)), config_hash(c));
  fs::remove(p);
}

TEST(Config, RejectsBadInput) {
  nlohmann::json j = to_json(ExperimentConfig{});
  j["schema_version"] = 2;
  EXPECT_THROW(config_from_json(j), std::invalid_argument);
  j = to_json(ExperimentConfig{});
  j["attacks"]["protocol"] = "sideways";
  EXPECT_THROW(config_from_json(j), std::invalid_argument);
  EXPECT_THROW(load_config(fs::temp_directory_path() / "imsp_missing_cfg.json"), std::runtime_error);
}

TEST(Config, ReseedChangesEverySeed) {
  ExperimentConfig a;
  ExperimentConfig b;
  a.reseed(1);
  b.reseed(2);
  EXPECT_NE(a.data.seed, b.data.seed);
  EXPECT_NE(a.pin.seed, b.pin.seed);
  EXPECT_NE(a.attack_seed, b.attack_seed);
  ExperimentConfig a2;
  a2.reseed(1);
  EXPECT_EQ(config_hash(a), config_hash(a2));
}

TEST(Stats, HistogramVarianceMedian) {
  const Histogram h = make_histogram({0.0, 0.1, 0.49, 0.5, 0.99, 1.0, -3.0, 7.0}, 2, 0.0, 1.0);
  ASSERT_EQ(h.counts.size(), 2u);
  // Out-of-range values land in the edge bins; 1.0 belongs to the last bin.
  EXPECT_EQ(h.counts[0], 4);
  EXPECT_EQ(h.counts[1], 4);
  EXPECT_THROW(make_histogram({0.5}, 0, 0.0, 1.0), std::invalid_argument);

  EXPECT_NEAR(variance({1.0, 2.0, 3.0, 4.0}), 5.0 / 3.0, 1e-12);
  EXPECT_EQ(variance({2.0}), 0.0);
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
}

TEST(Rows, CleanRowMatchesMetrics) {
  PairSet pairs;
  const std::vector<double> scores{0.9, 0.2, 0.8, 0.7, 0.3, 0.1};
  const std::vector<char> pos{1, 0, 1, 0, 1, 0};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    pairs.probes.push_back(Vector::Zero(1));
    pairs.refs.push_back(Vector::Zero(1));
    pairs.positive.push_back(pos[i]);
  }
  const AttackRow row = make_row("clean", "none", "none", scores, pairs, 0.5, {}, 0);
  const auto m = rec::compute_metrics({0.9, 0.8, 0.3}, {0.2, 0.7, 0.1});
  EXPECT_EQ(row.metrics.eer, m.eer);
  EXPECT_EQ(row.metrics.auc, m.auc);
  EXPECT_NEAR(row.metrics.eer, 1.0 / 3.0, 1e-12);
  // Attacker's side of 0.5: positive 0.3 (dodged), negative 0.7 (impersonated).
  EXPECT_NEAR(row.success_rate, 2.0 / 6.0, 1e-12);
  EXPECT_EQ(row.pairs, 6u);
}

class WorkbenchTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "imsp_wb_test";
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(WorkbenchTest, MissingStagesAreReported) {
  Workbench wb(tiny_config(dir_));
  EXPECT_THROW(wb.dataset(false), MissingArtifact);
  EXPECT_THROW(wb.recognizer(false), MissingArtifact);
}

TEST_F(WorkbenchTest, BuildsOnceThenResumes) {
  std::vector<std::string> log1;
  {
    Workbench wb(tiny_config(dir_), [&](const std::string& m) { log1.push_back(m); });
    wb.recognizer(true);
    wb.pin(true);
    EXPECT_EQ(wb.dataset().manifest.eval_pairs.size(), 12u);
    EXPECT_EQ(wb.basis().count(), 10);
  }
  std::vector<std::string> log2;
  Workbench wb(tiny_config(dir_), [&](const std::string& m) { log2.push_back(m); });
  const auto& pm = wb.pin(false);
  EXPECT_EQ(pm.basis.count(), 10);
  wb.recognizer(false);
  auto loaded = [](const std::vector<std::string>& log, const std::string& what) {
    for (const auto& l : log)
      if (l.rfind(what, 0) == 0 && l.find("loaded") != std::string::npos) return true;
    return false;
  };
  EXPECT_FALSE(loaded(log1, "recognizer"));
  EXPECT_TRUE(loaded(log2, "dataset"));
  EXPECT_TRUE(loaded(log2, "recognizer"));
  EXPECT_TRUE(loaded(log2, "basis"));
  EXPECT_TRUE(loaded(log2, "pin"));

  // A changed recognizer setting invalidates the recognizer but not the data.
  ExperimentConfig c = tiny_config(dir_);
  c.recognizer.epochs = 6;
  Workbench stale(c);
  EXPECT_NO_THROW(stale.dataset(false));
  EXPECT_THROW(stale.recognizer(false), MissingArtifact);
}

TEST_F(WorkbenchTest, EvalPairsAndCleanTable) {
  Workbench wb(tiny_config(dir_));
  wb.recognizer(true);
  const PairSet all = eval_pairs(wb.dataset());
  EXPECT_EQ(all.size(), 12u);
  const PairSet some = eval_pairs(wb.dataset(), 5);
  ASSERT_EQ(some.size(), 5u);
  EXPECT_EQ(std::count(some.positive.begin(), some.positive.end(), 1), 2);

  const auto rows = attack_table(wb.recognizer(), {{"none", attack::Defense::none()}}, {"fgsm"}, "offline", all,
                                 wb.config().attacks, 1, 2, 1);
  const AttackRow& clean = find_row(rows, "clean", "none", "none");
  std::vector<double> pos;
  std::vector<double> neg;
  for (std::size_t i = 0; i < all.size(); ++i)
    (all.positive[i] ? pos : neg).push_back(clean.scores[i]);
  EXPECT_EQ(clean.metrics.eer, rec::compute_metrics(pos, neg).eer);
  const AttackRow& fgsm = find_row(rows, "fgsm", "none", "none");
  EXPECT_NEAR(fgsm.mean_intensity, 0.04, 0.005);
  EXPECT_THROW(find_row(rows, "pgd", "none", "none"), std::out_of_range);
}

}  // namespace
}  // namespace imsp::exp
