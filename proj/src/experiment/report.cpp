#include "imsp/experiment/report.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "imsp/core/hash.hpp"

namespace imsp::exp {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  return out;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

nlohmann::json provenance(Workbench& wb) {
  nlohmann::json j;
  j["config_hash"] = hex64(config_hash(wb.config()));
  j["artifacts"] = {{"dataset", hex64(wb.data_hash())},
                    {"recognizer", hex64(wb.recognizer_hash())},
                    {"basis", hex64(wb.basis_hash())},
                    {"pin", hex64(wb.pin_hash())}};
  const auto now = std::chrono::system_clock::now();
  j["timing"] = {{"generated_unix",
                  std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()}};
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  return nlohmann::json::parse(in);
}

nlohmann::json metrics_json(const rec::VerificationMetrics& m) {
  nlohmann::json tar = nlohmann::json::object();
  for (std::size_t i = 0; i < rec::kFarLevels.size(); ++i)
    tar[fmt::format("{:g}", rec::kFarLevels[i])] = number_or_null(m.tar_at_far[i]);
  return {{"eer", m.eer},
          {"eer_threshold", number_or_null(m.eer_threshold)},
          {"tar_at_far", tar},
          {"auc", m.auc},
          {"low_confidence", m.low_confidence},
          {"positives", m.positives},
          {"negatives", m.negatives}};
}

nlohmann::json rows_json(const std::vector<AttackRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"attack", r.attack},
                   {"protocol", r.protocol},
                   {"defense", r.defense},
                   {"metrics", metrics_json(r.metrics)},
                   {"success_rate", r.success_rate},
                   {"mean_intensity", r.mean_intensity},
                   {"flagged", r.flagged},
                   {"pairs", r.pairs}});
  return arr;
}

void write_rows_csv(const std::filesystem::path& path, const std::vector<AttackRow>& rows) {
  auto out = open_out(path);
  out << "attack,protocol,defense,eer,tar_far_0.1,tar_far_0.01,tar_far_0.001,auc,success_rate,mean_intensity,"
         "flagged,pairs\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    out << fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", r.attack, r.protocol,
                       r.defense, m.eer, m.tar_at_far[0], m.tar_at_far[1], m.tar_at_far[2], m.auc, r.success_rate,
                       r.mean_intensity, r.flagged, r.pairs);
  }
}

std::string format_rows(const std::vector<AttackRow>& rows) {
  std::string s = fmt::format("{:<10} {:<8} {:<14} {:>7} {:>9} {:>9} {:>7} {:>8}\n", "attack", "protocol", "defense",
                              "EER%", "TAR@1e-1", "TAR@1e-2", "AUC", "success");
  for (const auto& r : rows)
    s += fmt::format("{:<10} {:<8} {:<14} {:>7.2f} {:>9.3f} {:>9.3f} {:>7.4f} {:>8.3f}\n", r.attack, r.protocol,
                     r.defense, 100.0 * r.metrics.eer, r.metrics.tar_at_far[0], r.metrics.tar_at_far[1],
                     r.metrics.auc, r.success_rate);
  return s;
}

nlohmann::json subspace_json(const SubspaceReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& g : p.regions)
      regions.push_back({{"region", g.region},
                         {"var_before", g.var_before},
                         {"var_after", g.var_after},
                         {"mean_before", g.mean_before},
                         {"mean_after", g.mean_after}});
    pairs.push_back({{"positive", p.positive},
                     {"clean_similarity", p.clean_similarity},
                     {"clean_similarity_projected", p.clean_similarity_projected},
                     {"regions", regions}});
  }
  return {{"samples", r.samples}, {"intensity", r.intensity}, {"components", r.components}, {"pairs", pairs}};
}

void write_subspace(const std::filesystem::path& dir, const SubspaceReport& r, int bins) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "subspace_samples.csv");
    out << "pair,region,sample,before,after\n";
    for (const auto& p : r.pairs)
      for (const auto& g : p.regions)
        for (std::size_t i = 0; i < g.before.size(); ++i)
          out << fmt::format("{},{},{},{:.8f},{:.8f}\n", p.positive ? "positive" : "negative", g.region, i,
                             g.before[i], g.after[i]);
  }
  for (const auto& p : r.pairs) {
    for (const auto& g : p.regions) {
      // Shared bin range so before/after overlay in one plot.
      double lo = 1.0;
      double hi = -1.0;
      for (const auto* v : {&g.before, &g.after})
        for (double x : *v) {
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
      if (!(hi > lo)) {
        lo -= 1e-3;
        hi += 1e-3;
      }
      const Histogram hb = make_histogram(g.before, bins, lo, hi);
      const Histogram ha = make_histogram(g.after, bins, lo, hi);
      auto out = open_out(dir / fmt::format("hist_{}_{}.dat", p.positive ? "positive" : "negative", g.region));
      out << "# bin_center count_before count_after\n";
      const double w = (hi - lo) / bins;
      for (int b = 0; b < bins; ++b)
        out << fmt::format("{:.6f} {} {}\n", lo + (b + 0.5) * w, hb.counts[static_cast<std::size_t>(b)],
                           ha.counts[static_cast<std::size_t>(b)]);
    }
  }
}

nlohmann::json audit_json(const AuditReport& r) {
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : r.conditions) conds.push_back({{"name", c.name}, {"passed", c.passed}, {"numbers", c.numbers}});
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& p : r.sweep)
    sweep.push_back({{"intensity", p.intensity}, {"successes", p.successes}, {"trials", p.trials}});
  return {{"conditions", conds}, {"sweep", sweep}, {"rows", rows_json(r.rows)}};
}

namespace {
double mse_at(const attack::DistortionTrace& t, int iteration) {
  double v = t.points.empty() ? 0.0 : t.points.front().mse;
  for (const auto& p : t.points) {
    if (p.iteration > iteration) break;
    v = p.mse;
  }
  return v;
}
}  // namespace

nlohmann::json blackbox_json(const BlackBoxReport& r, const std::vector<int>& checkpoints) {
  nlohmann::json cps = nlohmann::json::array();
  for (int c : checkpoints) {
    std::vector<double> u;
    std::vector<double> d;
    for (std::size_t i = 0; i < r.undefended.size(); ++i) {
      if (!r.undefended[i].started || !r.defended[i].started) continue;
      u.push_back(mse_at(r.undefended[i], c));
      d.push_back(mse_at(r.defended[i], c));
    }
    cps.push_back({{"iteration", c}, {"median_mse_undefended", median(u)}, {"median_mse_defended", median(d)}});
  }
  return {{"pairs", r.undefended.size()},
          {"started_pairs", r.started_pairs},
          {"median_final_mse_undefended", r.median_undefended},
          {"median_final_mse_defended", r.median_defended},
          {"ratio", r.ratio},
          {"checkpoints", cps}};
}

void write_blackbox_csv(const std::filesystem::path& path, const BlackBoxReport& r) {
  auto out = open_out(path);
  out << "pair,positive,pipeline,iteration,mse,adversarial\n";
  for (std::size_t i = 0; i < r.undefended.size(); ++i)
    for (int side = 0; side < 2; ++side) {
      const auto& t = side == 0 ? r.undefended[i] : r.defended[i];
      for (const auto& p : t.points)
        out << fmt::format("{},{},{},{},{:.8g},{}\n", i, int(r.positive[i]), side == 0 ? "undefended" : "pin",
                           p.iteration, p.mse, int(p.adversarial));
    }
}

nlohmann::json sticker_json(const StickerReport& r) {
  auto one = [](const attack::StickerResult& s) {
    return nlohmann::json{{"error_rate", s.error_rate},
                          {"clean_error_rate", s.clean_error_rate},
                          {"mean_attack_similarity", s.mean_attack_similarity},
                          {"restart_used", s.restart_used}};
  };
  return {{"target_identity", r.target_identity},
          {"gallery", r.gallery},
          {"undefended", one(r.undefended)},
          {"pin_online", one(r.defended_online)},
          {"pin_offline_error_rate", r.defended_offline_error}};
}

}  // namespace imsp::exp
