#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "imsp/core/parallel.hpp"
#include "imsp/data/pgm.hpp"
#include "imsp/experiment/report.hpp"

namespace fs = std::filesystem;
using namespace imsp;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned jobs = 0;
};

exp::ExperimentConfig resolve(const Globals& g) {
  exp::ExperimentConfig cfg = g.config.empty() ? exp::ExperimentConfig{} : exp::load_config(g.config);
  if (g.seed) cfg.reseed(*g.seed);
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (g.jobs) cfg.jobs = g.jobs;
  set_default_jobs(cfg.jobs);
  return cfg;
}

exp::Workbench bench(const Globals& g) {
  auto cfg = resolve(g);
  fs::create_directories(cfg.out_dir);
  exp::save_config(cfg.out_dir / "config.json", cfg);
  return exp::Workbench(cfg, [](const std::string& m) { std::fprintf(stderr, "[imsp] %s\n", m.c_str()); });
}

fs::path reports(const exp::Workbench& wb) { return wb.dir() / "reports"; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<exp::NamedDefense> defenses_for(exp::Workbench& wb, const std::vector<std::string>& names, bool build) {
  const auto& a = wb.config().attacks;
  std::vector<exp::NamedDefense> out;
  for (const auto& n : names) {
    if (n == "none")
      out.push_back({n, attack::Defense::none()});
    else if (n == "pin")
      out.push_back({n, attack::Defense::learnable(wb.pin(build))});
    else if (n == "pin-dae")
      out.push_back({n, attack::Defense::learnable(wb.pin_with_dae(build))});
    else if (n == "pca-small")
      out.push_back({fmt::format("pca-{}", a.classical_small_k),
                     attack::Defense::classical(wb.basis(build), a.classical_small_k)});
    else if (n == "pca-large")
      out.push_back({fmt::format("pca-{}", a.classical_large_k),
                     attack::Defense::classical(wb.basis(build), a.classical_large_k)});
    else
      throw CLI::ValidationError("--defenses", fmt::format("unknown defense '{}'", n));
  }
  return out;
}

void cmd_gen_data(const Globals& g, bool export_pgm) {
  auto wb = bench(g);
  const auto& d = wb.dataset();
  if (export_pgm) {
    const int h = wb.config().data.render.height;
    const int w = wb.config().data.render.width;
    fs::create_directories(wb.dir() / "images");
    for (std::size_t i = 0; i < d.images.size(); ++i) {
      const auto& s = d.manifest.samples[i];
      data::write_pgm(wb.dir() / "images" / fmt::format("id{:02d}_{:03d}.pgm", s.identity, s.ordinal),
                      data::Image{h, w, d.images[i]});
    }
  }
  fmt::print("dataset {} ({} samples, {} eval pairs)\n", wb.dir().string(), d.images.size(),
             d.manifest.eval_pairs.size());
}

void cmd_train(const Globals& g, bool with_dae) {
  auto wb = bench(g);
  wb.dataset();
  const auto& m = wb.recognizer();
  wb.basis();
  wb.pin();
  if (with_dae) wb.pin_with_dae();
  fmt::print("trained: threshold {:.4f}, artifacts in {}\n", m.threshold, wb.dir().string());
}

void cmd_subspace(const Globals& g) {
  auto wb = bench(g);
  const auto& sc = wb.config().subspace;
  const auto rep = exp::subspace_study(wb, sc);
  exp::write_subspace(reports(wb) / "subspace", rep, sc.bins);
  nlohmann::json j = exp::subspace_json(rep);
  j["provenance"] = exp::provenance(wb);
  exp::write_json(reports(wb) / "subspace.json", j);
  for (const auto& p : rep.pairs)
    for (const auto& r : p.regions)
      fmt::print("{} pair {:<7} var before {:.3e} after {:.3e}\n", p.positive ? "positive" : "negative", r.region,
                 r.var_before, r.var_after);
}

void cmd_attack_eval(const Globals& g, std::string attacks, std::string protocol, const std::string& defenses,
                     int pairs) {
  auto wb = bench(g);
  const auto& a = wb.config().attacks;
  const auto names = attacks.empty() ? a.attacks : split_list(attacks);
  if (protocol.empty()) protocol = a.protocol;
  const auto defs = defenses_for(wb, split_list(defenses), false);
  const auto& model = wb.recognizer(false);
  const auto ps = exp::eval_pairs(wb.dataset(false), pairs >= 0 ? pairs : a.table_pairs);
  const auto rows = exp::attack_table(model, defs, names, protocol, ps, a, wb.config().attack_seed,
                                      wb.config().eval_seed, wb.config().jobs);
  exp::write_rows_csv(reports(wb) / "attack_eval.csv", rows);
  {
    std::string csv = "row,pair,positive,score\n";
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t i = 0; i < rows[r].scores.size(); ++i)
        csv += fmt::format("{}/{}/{},{},{},{:.8f}\n", rows[r].attack, rows[r].protocol, rows[r].defense, i,
                           int(ps.positive[i]), rows[r].scores[i]);
    std::FILE* f = std::fopen((reports(wb) / "attack_eval_scores.csv").c_str(), "w");
    if (!f) throw std::runtime_error("cannot write per-pair scores");
    std::fputs(csv.c_str(), f);
    std::fclose(f);
  }
  exp::write_json(reports(wb) / "attack_eval.json",
                  {{"rows", exp::rows_json(rows)}, {"provenance", exp::provenance(wb)}});
  fmt::print("{}", exp::format_rows(rows));
}

void cmd_audit(const Globals& g) {
  auto wb = bench(g);
  wb.recognizer(false);
  wb.pin(false);
  const auto rep = exp::audit_gradients(wb);
  nlohmann::json j = exp::audit_json(rep);
  j["provenance"] = exp::provenance(wb);
  exp::write_json(reports(wb) / "audit.json", j);
  for (const auto& c : rep.conditions) fmt::print("{} {} {}\n", c.passed ? "PASS" : "FAIL", c.name, c.numbers.dump());
}

void cmd_blackbox(const Globals& g) {
  auto wb = bench(g);
  wb.recognizer(false);
  wb.pin(false);
  const auto rep = exp::blackbox_study(wb);
  exp::write_blackbox_csv(reports(wb) / "blackbox_traces.csv", rep);
  nlohmann::json j = exp::blackbox_json(rep, wb.config().attacks.blackbox.checkpoints);
  j["provenance"] = exp::provenance(wb);
  exp::write_json(reports(wb) / "blackbox.json", j);
  fmt::print("median final MSE: undefended {:.3e}, pin {:.3e}, ratio {:.2f} over {} pairs\n", rep.median_undefended,
             rep.median_defended, rep.ratio, rep.started_pairs);
}

void cmd_sticker(const Globals& g) {
  auto wb = bench(g);
  wb.recognizer(false);
  wb.pin(false);
  const auto rep = exp::sticker_study(wb);
  nlohmann::json j = exp::sticker_json(rep);
  j["provenance"] = exp::provenance(wb);
  exp::write_json(reports(wb) / "sticker.json", j);
  fmt::print("sticker error rate: undefended {:.3f}, pin online {:.3f}, pin offline {:.3f}\n",
             rep.undefended.error_rate, rep.defended_online.error_rate, rep.defended_offline_error);
}

// Gathers whatever per-experiment reports exist into one document.
void cmd_report(const Globals& g) {
  auto wb = bench(g);
  nlohmann::json all;
  for (const char* name : {"subspace", "attack_eval", "audit", "blackbox", "sticker"}) {
    const fs::path p = reports(wb) / fmt::format("{}.json", name);
    if (fs::exists(p)) {
      auto j = exp::read_json(p);
      j.erase("provenance");
      all[name] = std::move(j);
    }
  }
  if (fs::exists(wb.dir() / "pin" / "reward_curve.csv")) all["reward_curve"] = (wb.dir() / "pin" / "reward_curve.csv").string();
  all["provenance"] = exp::provenance(wb);
  exp::write_json(reports(wb) / "report.json", all);
  fmt::print("{}\n", (reports(wb) / "report.json").string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learnable-PCA input purification experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "derive every seed from this value");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--jobs", g.jobs, "worker threads (0 = all cores)");

  bool export_pgm = false;
  auto* gen = app.add_subcommand("gen-data", "generate the synthetic benchmark manifest");
  gen->add_flag("--export-pgm", export_pgm, "also write every image as PGM");
  gen->callback([&] { cmd_gen_data(g, export_pgm); });

  app.add_subcommand("fit-pca", "fit the eigenbasis")->callback([&] {
    auto wb = bench(g);
    fmt::print("basis: {} components\n", wb.basis().count());
  });
  app.add_subcommand("train-recognizer", "train and calibrate the recognizer")->callback([&] {
    auto wb = bench(g);
    fmt::print("threshold {:.4f}\n", wb.recognizer().threshold);
  });
  bool pin_dae = false;
  auto* tp = app.add_subcommand("train-pin", "train the selection agent");
  tp->add_flag("--dae", pin_dae, "train the denoising-front-end variant instead");
  tp->callback([&] {
    auto wb = bench(g);
    if (pin_dae)
      wb.pin_with_dae();
    else
      wb.pin();
    fmt::print("pin trained in {}\n", wb.dir().string());
  });
  bool train_dae = false;
  auto* tr = app.add_subcommand("train", "all training stages in order");
  tr->add_flag("--with-dae", train_dae, "also train the denoising-front-end variant");
  tr->callback([&] { cmd_train(g, train_dae); });

  app.add_subcommand("subspace-study", "region-noise similarity distributions")->callback([&] { cmd_subspace(g); });

  std::string attacks;
  std::string protocol;
  std::string defenses = "none,pin,pca-small,pca-large";
  int pairs = -1;
  auto* ae = app.add_subcommand("attack-eval", "attack x protocol x defense table");
  ae->add_option("--attacks", attacks, "comma list: fgsm,ifgsm,pgd,pgd100,deepfool");
  ae->add_option("--protocol", protocol, "offline | online | both")
      ->check(CLI::IsMember({"offline", "online", "both"}));
  ae->add_option("--defenses", defenses, "comma list: none,pin,pin-dae,pca-small,pca-large");
  ae->add_option("--pairs", pairs, "limit to n/2 positive + n/2 negative pairs (0 = all)");
  ae->callback([&] { cmd_attack_eval(g, attacks, protocol, defenses, pairs); });

  app.add_subcommand("audit-gradients", "obfuscated-gradient checks")->callback([&] { cmd_audit(g); });
  app.add_subcommand("blackbox", "decision-only attack distortion traces")->callback([&] { cmd_blackbox(g); });
  app.add_subcommand("sticker", "universal patch impersonation")->callback([&] { cmd_sticker(g); });
  app.add_subcommand("report", "collect reports into one JSON")->callback([&] { cmd_report(g); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const exp::MissingArtifact& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
