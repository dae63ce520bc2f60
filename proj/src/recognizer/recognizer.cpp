#include "imsp/recognizer/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "imsp/core/binary_io.hpp"
#include "imsp/core/parallel.hpp"
#include "imsp/nn/checkpoint.hpp"
#include "imsp/nn/optimizer.hpp"

namespace imsp::rec {

using nn::LayerSpec;

namespace {

std::vector<LayerSpec> trunk(const RecognizerConfig& cfg) {
  const int h = (((cfg.height + 1) / 2) + 1) / 2;
  const int w = (((cfg.width + 1) / 2) + 1) / 2;
  return {LayerSpec::conv2d(1, cfg.conv1, 3, 2), LayerSpec::prelu(cfg.conv1),
          LayerSpec::conv2d(cfg.conv1, cfg.conv2, 3, 2), LayerSpec::prelu(cfg.conv2),
          LayerSpec::flatten(), LayerSpec::affine(cfg.conv2 * h * w, cfg.hidden),
          LayerSpec::prelu(cfg.hidden), LayerSpec::affine(cfg.hidden, cfg.embed_dim)};
}

// Softmax cross-entropy; returns loss and writes dL/dlogits.
double cross_entropy(const Vector& logits, int label, Vector& grad) {
  const double mx = logits.maxCoeff();
  Vector e = (logits.array() - mx).exp().matrix();
  const double z = e.sum();
  grad = e / z;
  const double loss = -std::log(std::max(grad(label), 1e-300));
  grad(label) -= 1.0;
  return loss;
}

}  // namespace

nn::NetworkSpec embedding_spec(const RecognizerConfig& cfg) {
  auto layers = trunk(cfg);
  layers.push_back(LayerSpec::l2_normalize());
  return nn::NetworkSpec(nn::Shape{1, cfg.height, cfg.width}, layers);
}

nn::NetworkSpec classifier_spec(const RecognizerConfig& cfg, int classes) {
  auto layers = trunk(cfg);
  layers.push_back(LayerSpec::affine(cfg.embed_dim, classes));
  return nn::NetworkSpec(nn::Shape{1, cfg.height, cfg.width}, layers);
}

RecognizerModel train_recognizer(const std::vector<Vector>& images, const std::vector<int>& labels,
                                 const RecognizerConfig& cfg, SeededRng& rng, TrainReport* report,
                                 unsigned jobs) {
  if (images.size() != labels.size() || images.empty())
    throw std::invalid_argument("train_recognizer: images and labels must be non-empty and aligned");
  const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
  if (*std::min_element(labels.begin(), labels.end()) < 0) throw std::invalid_argument("negative label");

  const nn::NetworkSpec net = classifier_spec(cfg, classes);
  nn::ParamSet params = nn::init_params(net, rng);
  // Small classifier init keeps early logits moderate.
  params.weight(net, net.layers().size() - 1) *= 0.5;
  nn::OptimizerState opt =
      nn::make_optimizer(params, nn::LrSchedule{cfg.lr, std::max(1, cfg.epochs / 3), 0.5}, cfg.momentum,
                         cfg.weight_decay);

  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), 0);
  TrainReport rep;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    opt.epoch = epoch;
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      const std::size_t bs = end - start;
      std::vector<Vector> grads(bs);
      std::vector<double> losses(bs);
      std::vector<char> hits(bs);
      parallel_for(
          bs,
          [&](std::size_t k) {
            const std::size_t i = order[start + k];
            auto fr = nn::forward(net, params, images[i]);
            Vector up;
            losses[k] = cross_entropy(fr.output, labels[i], up);
            Eigen::Index arg = 0;
            fr.output.maxCoeff(&arg);
            hits[k] = arg == labels[i];
            grads[k] = nn::backward(fr.tape, up).params;
          },
          jobs);
      Vector g = Vector::Zero(params.values.size());
      for (std::size_t k = 0; k < bs; ++k) {
        g += grads[k];
        loss_sum += losses[k];
        correct += static_cast<std::size_t>(hits[k]);
      }
      g /= static_cast<double>(bs);
      nn::sgd_momentum_step(params, g, opt);
    }
    rep.epoch_loss.push_back(loss_sum / images.size());
    rep.train_accuracy = static_cast<double>(correct) / images.size();
    rep.epochs = epoch + 1;
    if (epoch + 1 >= cfg.min_epochs && rep.train_accuracy >= cfg.target_accuracy) break;
  }
  // Accuracy of the final parameters.
  std::size_t correct = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    Eigen::Index arg = 0;
    nn::evaluate(net, params, images[i]).maxCoeff(&arg);
    correct += arg == labels[i];
  }
  rep.train_accuracy = static_cast<double>(correct) / images.size();
  if (report) *report = rep;
  if (rep.train_accuracy < cfg.min_accuracy)
    throw RecognizerTrainingError(fmt::format(
        "recognizer reached {:.1f}% train accuracy after {} epochs (need {:.0f}%): dataset and model do not match",
        100.0 * rep.train_accuracy, rep.epochs, 100.0 * cfg.min_accuracy));

  RecognizerModel model;
  model.spec = embedding_spec(cfg);
  model.params.values = params.values.head(static_cast<Eigen::Index>(model.spec.param_count()));
  return model;
}

Vector embed(const RecognizerModel& model, const Vector& x) { return nn::evaluate(model.spec, model.params, x); }

double similarity(const Vector& e1, const Vector& e2) {
  if (e1.size() != e2.size()) throw std::invalid_argument("similarity: dimension mismatch");
  return e1.dot(e2);
}

double similarity_grad(const RecognizerModel& model, const Vector& probe, const Vector& ref_embedding,
                       Vector* grad) {
  auto fr = nn::forward(model.spec, model.params, probe);
  const double s = fr.output.dot(ref_embedding);
  if (grad) *grad = nn::backward(fr.tape, ref_embedding, false).input;
  return s;
}

void save_recognizer(const std::filesystem::path& path, const RecognizerModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  nn::write_params(out, model.spec, model.params);
  Matrix t(1, 1);
  t(0, 0) = model.threshold;
  write_matrix(out, t);
}

RecognizerModel load_recognizer(const std::filesystem::path& path, const RecognizerConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  RecognizerModel m;
  m.spec = embedding_spec(cfg);
  m.params = nn::read_params(in, m.spec);
  const Matrix t = read_matrix(in);
  if (t.size() != 1) throw FormatError("recognizer file: bad threshold record");
  m.threshold = t(0, 0);
  return m;
}

}  // namespace imsp::rec
