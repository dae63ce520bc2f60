#include "imsp/pin/dae.hpp"

#include <numeric>
#include <stdexcept>

#include "imsp/core/parallel.hpp"
#include "imsp/nn/optimizer.hpp"

namespace imsp::pin {

using nn::LayerSpec;

nn::NetworkSpec dae_spec(int height, int width) {
  const int h = (((height + 1) / 2) + 1) / 2;
  const int w = (((width + 1) / 2) + 1) / 2;
  return nn::NetworkSpec(nn::Shape{1, height, width},
                         {LayerSpec::conv2d(1, 8, 3, 2), LayerSpec::prelu(8), LayerSpec::conv2d(8, 8, 3, 2),
                          LayerSpec::prelu(8), LayerSpec::flatten(), LayerSpec::affine(8 * h * w, height * width),
                          LayerSpec::sigmoid()});
}

Dae dae_pretrain(const std::vector<Vector>& noisy, const std::vector<Vector>& clean, int height, int width,
                 int epochs, SeededRng& rng, DaeReport* report, unsigned jobs) {
  if (noisy.size() != clean.size() || noisy.empty())
    throw std::invalid_argument("dae_pretrain: need aligned, non-empty noisy/clean sets");
  Dae dae;
  dae.spec = dae_spec(height, width);
  dae.params = nn::init_params(dae.spec, rng);
  dae.params.weight(dae.spec, 5) *= 0.1;
  nn::OptimizerState opt = nn::make_optimizer(dae.params, nn::LrSchedule{0.05, std::max(1, epochs / 2), 0.5}, 0.9);

  constexpr std::size_t kBatch = 16;
  std::vector<std::size_t> order(noisy.size());
  std::iota(order.begin(), order.end(), 0);
  DaeReport rep;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    opt.epoch = epoch;
    shuffle(order, rng);
    double sse = 0.0;
    for (std::size_t start = 0; start < order.size(); start += kBatch) {
      const std::size_t bs = std::min(kBatch, order.size() - start);
      std::vector<Vector> grads(bs);
      std::vector<double> errs(bs);
      parallel_for(
          bs,
          [&](std::size_t k) {
            const std::size_t i = order[start + k];
            auto fr = nn::forward(dae.spec, dae.params, noisy[i]);
            const Vector diff = fr.output - clean[i];
            errs[k] = diff.squaredNorm();
            grads[k] = nn::backward(fr.tape, 2.0 * diff / static_cast<double>(diff.size())).params;
          },
          jobs);
      Vector g = Vector::Zero(dae.params.values.size());
      for (std::size_t k = 0; k < bs; ++k) {
        g += grads[k];
        sse += errs[k];
      }
      nn::sgd_momentum_step(dae.params, g / static_cast<double>(bs), opt);
    }
    rep.epoch_mse.push_back(sse / (static_cast<double>(noisy.size()) * noisy.front().size()));
  }
  if (report) *report = rep;
  return dae;
}

double dae_mse(const Dae& dae, const std::vector<Vector>& noisy, const std::vector<Vector>& clean) {
  double sse = 0.0;
  for (std::size_t i = 0; i < noisy.size(); ++i)
    sse += (nn::evaluate(dae.spec, dae.params, noisy[i]) - clean[i]).squaredNorm();
  return sse / (static_cast<double>(noisy.size()) * noisy.front().size());
}

}  // namespace imsp::pin
