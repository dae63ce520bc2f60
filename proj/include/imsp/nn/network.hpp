#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imsp/core/linalg.hpp"
#include "imsp/core/rng.hpp"

namespace imsp::nn {

enum class LayerKind { affine, conv2d, prelu, sigmoid, flatten, l2_normalize };

std::string to_string(LayerKind kind);

/// Channel-major tensor shape. Flat vectors are (n, 1, 1).
struct Shape {
  int c = 0;
  int h = 1;
  int w = 1;
  int size() const { return c * h * w; }
  bool operator==(const Shape&) const = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::flatten;
  int in = 0;        // affine input width, conv input channels
  int out = 0;       // affine output width, conv output channels
  int kernel = 0;    // conv only; padding is kernel / 2
  int stride = 1;    // conv only
  int channels = 0;  // prelu slope count

  static LayerSpec affine(int in, int out);
  static LayerSpec conv2d(int in_ch, int out_ch, int kernel, int stride);
  static LayerSpec prelu(int channels);
  static LayerSpec sigmoid();
  static LayerSpec flatten();
  static LayerSpec l2_normalize();
};

/// Where one layer's parameters live inside ParamSet::values.
struct ParamSlice {
  std::size_t weight_offset = 0;
  std::size_t weight_size = 0;
  std::size_t bias_offset = 0;
  std::size_t bias_size = 0;
  int weight_rows = 0;
  int weight_cols = 0;
};

/// A sequential layer stack. Construction validates shape compatibility and
/// fixes the parameter layout.
class NetworkSpec {
 public:
  NetworkSpec() = default;
  NetworkSpec(Shape input, std::vector<LayerSpec> layers);

  const Shape& input_shape() const { return input_; }
  const Shape& output_shape() const { return shapes_.back(); }
  const Shape& shape_before(std::size_t layer) const { return shapes_[layer]; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<ParamSlice>& slices() const { return slices_; }
  std::size_t param_count() const { return param_count_; }

  // Canonical one-line description, e.g. "in=1x32x32|conv(1,16,k3,s2)|prelu(16)".
  std::string describe() const;
  std::uint64_t hash() const;

  // Prefix [0, n) of the layer stack; shares the parameter layout prefix.
  NetworkSpec prefix(std::size_t n) const;
  // Appends layers; the combined parameter vector starts with this one's.
  NetworkSpec extended(const std::vector<LayerSpec>& more) const;

 private:
  Shape input_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;  // shapes_[i] is the input of layer i; back() is the output
  std::vector<ParamSlice> slices_;
  std::size_t param_count_ = 0;
};

/// Flat parameter vector theta laid out per NetworkSpec::slices().
struct ParamSet {
  Vector values;

  Eigen::Map<const Matrix> weight(const NetworkSpec& spec, std::size_t layer) const;
  Eigen::Map<Matrix> weight(const NetworkSpec& spec, std::size_t layer);
  Eigen::Map<const Vector> bias(const NetworkSpec& spec, std::size_t layer) const;
  Eigen::Map<Vector> bias(const NetworkSpec& spec, std::size_t layer);
};

// He-normal weights, zero biases, PReLU slopes 0.25.
ParamSet init_params(const NetworkSpec& spec, SeededRng& rng);
ParamSet zero_params(const NetworkSpec& spec);

/// Intermediates of one forward pass; valid for a single backward.
class Tape {
 public:
  bool consumed() const { return consumed_; }

 private:
  friend struct TapeAccess;
  const NetworkSpec* spec_ = nullptr;
  const ParamSet* params_ = nullptr;
  std::vector<Vector> inputs_;   // input of each layer
  std::vector<Matrix> columns_;  // im2col buffers for conv layers
  Vector output_;
  bool consumed_ = false;
};

struct ForwardResult {
  Vector output;
  Tape tape;
};

struct GradResult {
  Vector params;  // mirrors ParamSet::values; empty when not requested
  Vector input;
};

// The spec and params must outlive the returned tape.
ForwardResult forward(const NetworkSpec& spec, const ParamSet& params, const Vector& x);
Vector evaluate(const NetworkSpec& spec, const ParamSet& params, const Vector& x);

// Gradient of <upstream, output>. Throws if the tape was already used.
GradResult backward(Tape& tape, const Vector& upstream, bool want_param_grads = true);

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t worst_index = 0;
  bool worst_is_input = false;
};

// Central differences of <u, net(x)> for a fixed random u against backward,
// over a random subsample of parameter and input coordinates.
GradCheckReport grad_check(const NetworkSpec& spec, const ParamSet& params, const Vector& x,
                           SeededRng& rng, std::size_t coordinates = 200, double h = 1e-5);

double relative_error(double analytic, double numeric);

}  // namespace imsp::nn
