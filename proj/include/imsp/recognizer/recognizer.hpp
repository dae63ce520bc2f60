#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "imsp/core/linalg.hpp"
#include "imsp/core/rng.hpp"
#include "imsp/nn/network.hpp"

namespace imsp::rec {

struct RecognizerConfig {
  int height = 32;
  int width = 32;
  int conv1 = 8;
  int conv2 = 16;
  int hidden = 64;
  int embed_dim = 32;
  int epochs = 60;
  int batch = 16;
  double lr = 0.02;
  double momentum = 0.9;
  double weight_decay = 0.0;
  double target_accuracy = 1.0;  // stop once reached on the training set
  double min_accuracy = 0.9;     // below this after the epoch cap, training fails
  int min_epochs = 60;
};

/// Embedding network (ends in l2_normalize) plus its calibrated threshold.
struct RecognizerModel {
  nn::NetworkSpec spec;
  nn::ParamSet params;
  double threshold = 0.0;
};

class RecognizerTrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainReport {
  double train_accuracy = 0.0;
  int epochs = 0;
  std::vector<double> epoch_loss;
};

nn::NetworkSpec embedding_spec(const RecognizerConfig& cfg);
// Embedding trunk without the normalization, followed by a linear classifier.
// Its parameter vector begins with the embedding network's.
nn::NetworkSpec classifier_spec(const RecognizerConfig& cfg, int classes);

RecognizerModel train_recognizer(const std::vector<Vector>& images, const std::vector<int>& labels,
                                 const RecognizerConfig& cfg, SeededRng& rng, TrainReport* report = nullptr,
                                 unsigned jobs = 0);

Vector embed(const RecognizerModel& model, const Vector& x);
double similarity(const Vector& e1, const Vector& e2);

// Cosine similarity of embed(probe) with a fixed reference embedding and its
// gradient with respect to the probe image.
double similarity_grad(const RecognizerModel& model, const Vector& probe, const Vector& ref_embedding,
                       Vector* grad);

void save_recognizer(const std::filesystem::path& path, const RecognizerModel& model);
RecognizerModel load_recognizer(const std::filesystem::path& path, const RecognizerConfig& cfg);

}  // namespace imsp::rec
