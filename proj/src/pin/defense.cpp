#include "imsp/pin/defense.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "imsp/nn/checkpoint.hpp"

namespace imsp::pin {

Inactivation inactivate_detail(const PinModel& model, const Vector& x, DefenseMode mode, SeededRng* rng) {
  if (x.size() != model.basis.dim())
    throw std::invalid_argument(fmt::format("inactivate: image has {} pixels, basis expects {}", x.size(),
                                            model.basis.dim()));
  Inactivation out;
  out.p = agent_forward(model.agent, x);
  switch (mode) {
    case DefenseMode::stochastic:
    case DefenseMode::reparam_backward:
      if (!rng) throw std::invalid_argument("inactivate: sampling mode needs a seeded rng");
      out.q = sample_mask(out.p, *rng);
      break;
    case DefenseMode::deterministic:
    case DefenseMode::bpda_backward:
      out.q = threshold_mask(out.p);
      break;
  }
  out.unclamped = pca::project_unclamped(model.basis, out.q, x);
  out.output = out.unclamped.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

Vector inactivate(const PinModel& model, const Vector& x, DefenseMode mode, SeededRng* rng) {
  return inactivate_detail(model, x, mode, rng).output;
}

Vector defended_input_gradient_for_mask(const PinModel& model, const Vector& x, const Vector& q,
                                        const Vector& downstream, bool agent_path) {
  const auto& b = model.basis;
  Vector grad = pca::project_direction(b, q, downstream);
  if (!agent_path) return grad;
  const Vector j = (b.vectors.transpose() * downstream).cwiseProduct(pca::coefficients(b, x));
  const Agent& a = model.agent;
  if (a.dae) {
    auto dae_fr = nn::forward(a.dae->spec, a.dae->params, x);
    auto fr = nn::forward(a.spec, a.params, dae_fr.output);
    const Vector g_mid = nn::backward(fr.tape, j, false).input;
    grad += nn::backward(dae_fr.tape, g_mid, false).input;
  } else {
    auto fr = nn::forward(a.spec, a.params, x);
    grad += nn::backward(fr.tape, j, false).input;
  }
  return grad;
}

Vector defended_input_gradient(const PinModel& model, const Vector& x, const Vector& downstream, DefenseMode mode,
                               SeededRng* rng, Inactivation* forward_out) {
  if (mode != DefenseMode::reparam_backward && mode != DefenseMode::bpda_backward)
    throw std::invalid_argument(
        fmt::format("defended_input_gradient: mode {} has no gradient contract", to_string(mode)));
  Inactivation fwd = inactivate_detail(model, x, mode, rng);
  Vector g = defended_input_gradient_for_mask(model, x, fwd.q, downstream, mode == DefenseMode::reparam_backward);
  if (forward_out) *forward_out = std::move(fwd);
  return g;
}

void save_pin(const std::filesystem::path& dir, const PinModel& model) {
  std::filesystem::create_directories(dir);
  nn::save_params(dir / "agent.imnn", model.agent.spec, model.agent.params);
  pca::save_basis(dir / "basis.imsp", model.basis);
  if (model.agent.dae) nn::save_params(dir / "dae.imnn", model.agent.dae->spec, model.agent.dae->params);
  nlohmann::json j = to_json(model.config);
  j["basis_file"] = "basis.imsp";
  j["basis_hash"] = fmt::format("{:016x}", pca::basis_hash(model.basis));
  std::ofstream out(dir / "pin_config.json");
  out << j.dump(1) << '\n';
}

PinModel load_pin(const std::filesystem::path& dir, int height, int width) {
  std::ifstream in(dir / "pin_config.json");
  if (!in) throw std::runtime_error(fmt::format("missing {}", (dir / "pin_config.json").string()));
  const nlohmann::json j = nlohmann::json::parse(in);
  PinModel m;
  m.config = pin_config_from_json(j);
  m.basis = pca::load_basis(dir / j.value("basis_file", std::string("basis.imsp")));
  AgentConfig ac{height, width, m.config.conv1, m.config.conv2, m.config.hidden, m.basis.count()};
  m.agent.spec = agent_spec(ac);
  m.agent.params = nn::load_params(dir / "agent.imnn", m.agent.spec);
  if (m.config.dae_enabled) {
    Dae d;
    d.spec = dae_spec(height, width);
    d.params = nn::load_params(dir / "dae.imnn", d.spec);
    m.agent.dae = std::move(d);
  }
  return m;
}

}  // namespace imsp::pin
