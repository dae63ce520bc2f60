#include "imsp/experiment/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "imsp/attack/deepfool.hpp"
#include "imsp/core/parallel.hpp"
#include "imsp/data/noise.hpp"

namespace imsp::exp {

using attack::AttackTarget;
using attack::Defense;
using attack::Objective;
using attack::Protocol;

Histogram make_histogram(const std::vector<double>& values, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("make_histogram: bad range");
  Histogram h{lo, hi, std::vector<int>(static_cast<std::size_t>(bins), 0)};
  for (double v : values) {
    int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
    h.counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))]++;
  }
  return h;
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {
double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}
}  // namespace

SubspaceReport subspace_study(Workbench& wb, const SubspaceConfig& cfg) {
  const auto& data = wb.dataset();
  const auto& model = wb.recognizer();
  const auto& basis = wb.basis();
  if (cfg.components > basis.count()) throw std::invalid_argument("subspace study: K exceeds basis size");
  const int h = wb.config().data.render.height;
  const int w = wb.config().data.render.width;

  SubspaceReport report;
  report.samples = cfg.samples;
  report.intensity = cfg.intensity;
  report.components = cfg.components;

  std::vector<data::Pair> chosen;
  for (bool want : {true, false})
    for (const auto& p : data.manifest.eval_pairs)
      if (p.positive == want) {
        chosen.push_back(p);
        break;
      }

  const data::Band bands[] = {data::Band::top, data::Band::middle, data::Band::bottom};
  for (std::size_t pi = 0; pi < chosen.size(); ++pi) {
    const auto& p = chosen[pi];
    const Vector& probe = data.images[p.a];
    const Vector& ref = data.images[p.b];
    const Vector ref_e = rec::embed(model, ref);
    const Vector ref_proj_e = rec::embed(model, pca::classical_pca_defend(basis, cfg.components, ref));
    SubspacePair sp;
    sp.positive = p.positive;
    sp.clean_similarity = rec::similarity(rec::embed(model, probe), ref_e);
    sp.clean_similarity_projected =
        rec::similarity(rec::embed(model, pca::classical_pca_defend(basis, cfg.components, probe)), ref_proj_e);
    for (int bi = 0; bi < 3; ++bi) {
      const data::RegionMask mask = data::band_mask(bands[bi], h, w);
      RegionStats rs;
      rs.region = mask.name;
      rs.before.resize(static_cast<std::size_t>(cfg.samples));
      rs.after.resize(static_cast<std::size_t>(cfg.samples));
      parallel_for(
          static_cast<std::size_t>(cfg.samples),
          [&](std::size_t n) {
            SeededRng rng(wb.config().eval_seed, (pi * 3 + static_cast<std::size_t>(bi)) * 1000003ULL + n);
            const Vector xn = data::add_noise_at_intensity(probe, cfg.intensity, rng, &mask);
            rs.before[n] = rec::similarity(rec::embed(model, xn), ref_e);
            rs.after[n] =
                rec::similarity(rec::embed(model, pca::classical_pca_defend(basis, cfg.components, xn)), ref_proj_e);
          },
          wb.config().jobs);
      rs.var_before = variance(rs.before);
      rs.var_after = variance(rs.after);
      rs.mean_before = mean_of(rs.before);
      rs.mean_after = mean_of(rs.after);
      sp.regions.push_back(std::move(rs));
    }
    report.pairs.push_back(std::move(sp));
  }
  return report;
}

PairSet eval_pairs(const data::Dataset& data, int n) {
  PairSet ps;
  const int want_pos = n > 0 ? n / 2 : -1;
  const int want_neg = n > 0 ? n - n / 2 : -1;
  int npos = 0;
  int nneg = 0;
  for (const auto& p : data.manifest.eval_pairs) {
    if (p.positive && want_pos >= 0 && npos >= want_pos) continue;
    if (!p.positive && want_neg >= 0 && nneg >= want_neg) continue;
    (p.positive ? npos : nneg)++;
    ps.probes.push_back(data.images[p.a]);
    ps.refs.push_back(data.images[p.b]);
    ps.positive.push_back(p.positive);
  }
  return ps;
}

Crafted craft(const rec::RecognizerModel& model, const Defense& attacked, const AttackSpec& spec,
              const PairSet& pairs, const AttackSuiteConfig& acfg, std::uint64_t seed, unsigned jobs) {
  Defense d = attacked;
  if (d.kind == Defense::Kind::pin) d.grad_mode = spec.grad_mode;
  const AttackTarget target(model, d, spec.protocol);
  Crafted out;
  out.adversarial.resize(pairs.size());
  out.intensity.resize(pairs.size());
  std::vector<char> flagged(pairs.size(), 0);
  parallel_for(
      pairs.size(),
      [&](std::size_t i) {
        SeededRng rng(seed, i);
        const Vector& probe = pairs.probes[i];
        const Objective objective = attack::objective_for(pairs.positive[i]);
        const Vector ref_e = target.attack_embedding(pairs.refs[i], &rng);
        attack::AttackConfig cfg;
        cfg.intensity = spec.intensity;
        cfg.objective = objective;
        cfg.seed = seed;
        attack::AttackResult r;
        if (spec.name == "clean") {
          r.adversarial = probe;
        } else if (spec.name == "fgsm") {
          r = attack::fgsm(target, probe, ref_e, cfg, &rng);
        } else if (spec.name == "ifgsm") {
          cfg.steps = acfg.ifgsm_steps;
          r = attack::ifgsm(target, probe, ref_e, cfg, &rng);
        } else if (spec.name == "pgd" || spec.name == "pgd100") {
          cfg.steps = spec.name == "pgd" ? acfg.pgd_steps : acfg.pgd_high_steps;
          cfg.epsilon = spec.intensity * probe.norm() / std::sqrt(static_cast<double>(probe.size()));
          r = attack::pgd(target, probe, ref_e, cfg, &rng);
        } else if (spec.name == "deepfool") {
          attack::DeepFoolConfig dc;
          dc.max_iter = acfg.deepfool_iters;
          dc.overshoot = acfg.deepfool_overshoot;
          dc.intensity_cap = spec.intensity;
          dc.objective = objective;
          try {
            r = attack::deepfool_similarity(target, probe, ref_e, model.threshold, dc, &rng);
          } catch (const std::invalid_argument&) {
            r.adversarial = probe;  // already on the attacker's side
            r.flagged = true;
          }
        } else {
          throw std::invalid_argument(fmt::format("unknown attack '{}'", spec.name));
        }
        out.adversarial[i] = std::move(r.adversarial);
        out.intensity[i] = (out.adversarial[i] - probe).norm() / probe.norm();
        flagged[i] = r.flagged;
      },
      jobs);
  out.flagged = static_cast<int>(std::count(flagged.begin(), flagged.end(), 1));
  return out;
}

std::vector<double> deployed_scores(const rec::RecognizerModel& model, const Defense& deployed,
                                    const std::vector<Vector>& probes, const PairSet& pairs, std::uint64_t seed,
                                    unsigned jobs) {
  const AttackTarget target(model, deployed, Protocol::offline);
  std::vector<double> scores(pairs.size());
  parallel_for(
      pairs.size(),
      [&](std::size_t i) {
        SeededRng rng(seed, i);
        const Vector ref_e = target.deployed_embedding(pairs.refs[i], &rng);
        scores[i] = target.deployed_score(probes[i], ref_e, &rng);
      },
      jobs);
  return scores;
}

AttackRow make_row(const std::string& attack_name, const std::string& protocol, const std::string& defense,
                   const std::vector<double>& scores, const PairSet& pairs, double tau,
                   const std::vector<double>& intensities, int flagged) {
  AttackRow row;
  row.attack = attack_name;
  row.protocol = protocol;
  row.defense = defense;
  row.scores = scores;
  row.pairs = pairs.size();
  row.flagged = flagged;
  std::vector<double> pos;
  std::vector<double> neg;
  std::size_t success = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (pairs.positive[i] ? pos : neg).push_back(scores[i]);
    success += attack::is_adversarial(scores[i], tau, attack::objective_for(pairs.positive[i]));
  }
  row.metrics = rec::compute_metrics(pos, neg);
  row.success_rate = scores.empty() ? 0.0 : static_cast<double>(success) / scores.size();
  row.mean_intensity = mean_of(intensities);
  return row;
}

std::vector<AttackRow> attack_table(const rec::RecognizerModel& model, const std::vector<NamedDefense>& defenses,
                                    const std::vector<std::string>& attacks, const std::string& protocol,
                                    const PairSet& pairs, const AttackSuiteConfig& acfg, std::uint64_t attack_seed,
                                    std::uint64_t eval_seed, unsigned jobs) {
  std::vector<AttackRow> rows;
  const bool offline = protocol == "offline" || protocol == "both";
  const bool online = protocol == "online" || protocol == "both";
  {
    const Crafted clean = craft(model, Defense::none(), AttackSpec{"clean"}, pairs, acfg, attack_seed, jobs);
    for (const auto& d : defenses)
      rows.push_back(make_row("clean", "none", d.name,
                              deployed_scores(model, d.defense, clean.adversarial, pairs, eval_seed, jobs), pairs,
                              model.threshold, clean.intensity, 0));
  }
  for (const auto& name : attacks) {
    AttackSpec spec{name, Protocol::offline, pin::DefenseMode::reparam_backward, acfg.intensity};
    const Crafted off = craft(model, Defense::none(), spec, pairs, acfg, attack_seed, jobs);
    for (const auto& d : defenses) {
      if (!d.defense.active() || offline)
        rows.push_back(make_row(name, d.defense.active() ? "offline" : "none", d.name,
                                deployed_scores(model, d.defense, off.adversarial, pairs, eval_seed, jobs), pairs,
                                model.threshold, off.intensity, off.flagged));
      if (online && d.defense.active()) {
        AttackSpec on = spec;
        on.protocol = Protocol::online;
        on.grad_mode = d.defense.grad_mode;
        const Crafted c = craft(model, d.defense, on, pairs, acfg, attack_seed, jobs);
        rows.push_back(make_row(name, "online", d.name,
                                deployed_scores(model, d.defense, c.adversarial, pairs, eval_seed, jobs), pairs,
                                model.threshold, c.intensity, c.flagged));
      }
    }
  }
  return rows;
}

const AttackRow& find_row(const std::vector<AttackRow>& rows, const std::string& attack_name,
                          const std::string& protocol, const std::string& defense) {
  for (const auto& r : rows)
    if (r.attack == attack_name && r.protocol == protocol && r.defense == defense) return r;
  throw std::out_of_range(fmt::format("no report row {}/{}/{}", attack_name, protocol, defense));
}

AuditReport audit_gradients(Workbench& wb) {
  const auto& cfg = wb.config();
  const auto& acfg = cfg.attacks;
  const auto& model = wb.recognizer();
  const auto& pm = wb.pin();
  const PairSet pairs = eval_pairs(wb.dataset(), acfg.audit_pairs);
  const Defense st = Defense::learnable(pm, pin::DefenseMode::stochastic, pin::DefenseMode::reparam_backward);
  const Defense bpda = Defense::learnable(pm, pin::DefenseMode::stochastic, pin::DefenseMode::bpda_backward);

  AuditReport rep;
  auto run = [&](const std::string& name, Protocol protocol, const Defense& d, const std::string& label) {
    AttackSpec spec{name, protocol, d.grad_mode, acfg.intensity};
    const Crafted c = craft(model, protocol == Protocol::offline ? Defense::none() : d, spec, pairs, acfg,
                            cfg.attack_seed, cfg.jobs);
    rep.rows.push_back(make_row(name, attack::to_string(protocol), label,
                                deployed_scores(model, d, c.adversarial, pairs, cfg.eval_seed, cfg.jobs), pairs,
                                model.threshold, c.intensity, c.flagged));
    return rep.rows.back().metrics.eer;
  };
  const double fgsm_off = run("fgsm", Protocol::offline, st, "pin");
  const double fgsm_on = run("fgsm", Protocol::online, st, "pin");
  const double ifgsm_on = run("ifgsm", Protocol::online, st, "pin");
  const double fgsm_bpda = run("fgsm", Protocol::online, bpda, "pin-bpda");
  const double pgd_on = run("pgd100", Protocol::online, st, "pin");
  const double pgd_bpda = run("pgd100", Protocol::online, bpda, "pin-bpda");

  rep.conditions.push_back({"iterative_beats_single_step", ifgsm_on >= fgsm_on,
                            {{"ifgsm_online_eer", ifgsm_on}, {"fgsm_online_eer", fgsm_on}}});
  rep.conditions.push_back({"transfer_weaker_than_white_box", fgsm_off <= fgsm_on,
                            {{"fgsm_offline_eer", fgsm_off}, {"fgsm_online_eer", fgsm_on}}});

  // Sweep on positive pairs the defended pipeline accepts when clean.
  const auto clean_scores = deployed_scores(model, st, pairs.probes, pairs, cfg.eval_seed, cfg.jobs);
  std::vector<std::size_t> accepted;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs.positive[i] && clean_scores[i] > model.threshold) accepted.push_back(i);
  const AttackTarget online(model, st, Protocol::online);
  rep.sweep = attack::intensity_sweep(
      acfg.sweep, static_cast<int>(accepted.size()),
      [&](int k, double level) {
        const std::size_t i = accepted[static_cast<std::size_t>(k)];
        SeededRng arng(cfg.attack_seed, i);
        const Vector ref_a = online.attack_embedding(pairs.refs[i], &arng);
        attack::AttackConfig ac;
        ac.intensity = level;
        ac.objective = Objective::dodging;
        const auto r = attack::fgsm(online, pairs.probes[i], ref_a, ac, &arng);
        SeededRng erng(cfg.eval_seed, i);
        const Vector ref_e = online.deployed_embedding(pairs.refs[i], &erng);
        return online.deployed_score(r.adversarial, ref_e, &erng) <= model.threshold;
      },
      cfg.jobs);
  const bool monotone = attack::sweep_monotone(rep.sweep);
  const double top = rep.sweep.empty() ? 0.0 : rep.sweep.back().rate();
  nlohmann::json sweep_json = nlohmann::json::array();
  for (const auto& p : rep.sweep) sweep_json.push_back({{"intensity", p.intensity}, {"success_rate", p.rate()}});
  rep.conditions.push_back({"sweep_monotone_to_full_success", monotone && top == 1.0,
                            {{"monotone", monotone}, {"top_rate", top}, {"curve", sweep_json}}});

  // Random search where high-iteration PGD fails, under a stricter decision.
  rec::RecognizerModel strict = model;
  strict.threshold = acfg.search_threshold;
  const AttackTarget strict_on(strict, st, Protocol::online);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs.positive[i] && clean_scores[i] > strict.threshold) candidates.push_back(i);
  std::vector<char> pgd_success(candidates.size());
  parallel_for(
      candidates.size(),
      [&](std::size_t k) {
        const std::size_t i = candidates[k];
        SeededRng arng(cfg.attack_seed, i);
        const Vector ref_a = strict_on.attack_embedding(pairs.refs[i], &arng);
        attack::AttackConfig ac;
        ac.epsilon = acfg.search_epsilon;
        ac.steps = acfg.pgd_high_steps;
        ac.objective = Objective::dodging;
        const auto r = attack::pgd(strict_on, pairs.probes[i], ref_a, ac, &arng);
        SeededRng erng(cfg.eval_seed, i);
        const Vector ref_e = strict_on.deployed_embedding(pairs.refs[i], &erng);
        pgd_success[k] = strict_on.deployed_score(r.adversarial, ref_e, &erng) <= strict.threshold;
      },
      cfg.jobs);
  std::vector<std::size_t> pgd_failed;
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (!pgd_success[k]) pgd_failed.push_back(candidates[k]);
  const std::size_t n_search = std::min<std::size_t>(pgd_failed.size(), static_cast<std::size_t>(acfg.search_pairs));
  std::vector<char> found(n_search);
  parallel_for(
      n_search,
      [&](std::size_t k) {
        const std::size_t i = pgd_failed[k];
        SeededRng erng(cfg.eval_seed, i);
        const Vector ref_e = strict_on.deployed_embedding(pairs.refs[i], &erng);
        SeededRng srng(cfg.attack_seed ^ 0x5eed, i);
        found[k] = attack::random_search_ball(strict_on, pairs.probes[i], ref_e, Objective::dodging,
                                              acfg.search_epsilon, acfg.search_samples, srng, true)
                       .found;
      },
      cfg.jobs);
  const auto n_found = std::count(found.begin(), found.end(), 1);
  const double pgd_rate =
      candidates.empty() ? 0.0
                         : static_cast<double>(std::count(pgd_success.begin(), pgd_success.end(), 1)) /
                               candidates.size();
  rep.conditions.push_back({"random_search_no_better_than_pgd", n_search > 0 && n_found == 0,
                            {{"epsilon", acfg.search_epsilon},
                             {"threshold", strict.threshold},
                             {"pgd_success_rate", pgd_rate},
                             {"searched_pairs", n_search},
                             {"samples_per_pair", acfg.search_samples},
                             {"found", n_found}}});

  const double gap = fgsm_bpda - fgsm_on;
  rep.conditions.push_back({"bpda_close_to_straight_through", gap >= 0.0 && gap <= 0.10,
                            {{"fgsm_bpda_eer", fgsm_bpda},
                             {"fgsm_straight_through_eer", fgsm_on},
                             {"pgd100_bpda_eer", pgd_bpda},
                             {"pgd100_straight_through_eer", pgd_on}}});
  return rep;
}

BlackBoxReport blackbox_study(Workbench& wb) {
  const auto& cfg = wb.config();
  rec::RecognizerModel model = wb.recognizer();
  model.threshold = cfg.attacks.blackbox_threshold;
  const auto& pm = wb.pin();
  const AttackTarget bare(model, Defense::none(), Protocol::online);
  const AttackTarget defended(model, Defense::learnable(pm), Protocol::online);

  // Pairs the bare recognizer gets right at this threshold, half of each kind.
  const PairSet all = eval_pairs(wb.dataset());
  const auto clean = deployed_scores(model, Defense::none(), all.probes, all, cfg.eval_seed, cfg.jobs);
  PairSet pairs;
  const int want = cfg.attacks.blackbox_pairs;
  int npos = 0;
  int nneg = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const bool pos = all.positive[i];
    if ((pos ? npos : nneg) >= (pos ? want / 2 : want - want / 2)) continue;
    if (attack::is_adversarial(clean[i], model.threshold, attack::objective_for(pos))) continue;
    (pos ? npos : nneg)++;
    pairs.probes.push_back(all.probes[i]);
    pairs.refs.push_back(all.refs[i]);
    pairs.positive.push_back(all.positive[i]);
  }
  BlackBoxReport rep;
  rep.undefended.resize(pairs.size());
  rep.defended.resize(pairs.size());
  rep.positive = pairs.positive;
  parallel_for(
      pairs.size(),
      [&](std::size_t i) {
        const Objective objective = attack::objective_for(pairs.positive[i]);
        for (int side = 0; side < 2; ++side) {
          const AttackTarget& t = side == 0 ? bare : defended;
          SeededRng erng(cfg.eval_seed, i);
          const Vector ref_e = t.deployed_embedding(pairs.refs[i], &erng);
          SeededRng rng(cfg.attack_seed ^ 0xb1ac, i);
          auto trace = attack::decision_blackbox(t, pairs.probes[i], pairs.refs[i], ref_e, objective,
                                                 cfg.attacks.blackbox, rng);
          (side == 0 ? rep.undefended : rep.defended)[i] = std::move(trace);
        }
      },
      cfg.jobs);
  std::vector<double> u;
  std::vector<double> d;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!rep.undefended[i].started || !rep.defended[i].started) continue;
    u.push_back(rep.undefended[i].final_mse());
    d.push_back(rep.defended[i].final_mse());
  }
  rep.started_pairs = static_cast<int>(u.size());
  rep.median_undefended = median(u);
  rep.median_defended = median(d);
  rep.ratio = rep.median_undefended > 0.0 ? rep.median_defended / rep.median_undefended : 0.0;
  return rep;
}

StickerReport sticker_study(Workbench& wb) {
  const auto& cfg = wb.config();
  const auto& data = wb.dataset();
  const auto& model = wb.recognizer();
  const auto& pm = wb.pin();
  const auto idx = data.indices(data::Split::eval);
  StickerReport rep;
  const std::size_t target_index = idx.front();
  rep.target_identity = data.identity(target_index);
  const Vector& target_image = data.images[target_index];

  // Round-robin over the other identities.
  std::vector<std::vector<std::size_t>> by_id(static_cast<std::size_t>(cfg.data.identities));
  for (std::size_t i : idx)
    if (data.identity(i) != rep.target_identity) by_id[static_cast<std::size_t>(data.identity(i))].push_back(i);
  std::vector<Vector> gallery;
  for (std::size_t round = 0; gallery.size() < static_cast<std::size_t>(cfg.attacks.sticker_gallery); ++round) {
    bool any = false;
    for (const auto& v : by_id) {
      if (round < v.size() && gallery.size() < static_cast<std::size_t>(cfg.attacks.sticker_gallery)) {
        gallery.push_back(data.images[v[round]]);
        any = true;
      }
    }
    if (!any) break;
  }
  rep.gallery = gallery.size();
  const int h = cfg.data.render.height;
  const int w = cfg.data.render.width;
  const AttackTarget bare(model, Defense::none(), Protocol::online);
  const AttackTarget defended(model, Defense::learnable(pm), Protocol::online);
  SeededRng r1(cfg.attack_seed ^ 0x571c, 0);
  rep.undefended = attack::sticker_attack(bare, gallery, target_image, cfg.attacks.sticker, h, w, r1);
  SeededRng r2(cfg.attack_seed ^ 0x571c, 1);
  rep.defended_online = attack::sticker_attack(defended, gallery, target_image, cfg.attacks.sticker, h, w, r2);

  SeededRng erng(cfg.eval_seed ^ 0x571c, 0);
  const Vector ref_e = defended.deployed_embedding(target_image, &erng);
  std::size_t hits = 0;
  for (const Vector& x : gallery)
    hits += defended.deployed_accepts(attack::apply_sticker(x, rep.undefended.patch, cfg.attacks.sticker, w), ref_e,
                                      &erng);
  rep.defended_offline_error = static_cast<double>(hits) / gallery.size();
  return rep;
}

}  // namespace imsp::exp
