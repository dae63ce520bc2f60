#include "imsp/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "imsp/core/hash.hpp"

namespace imsp::nn {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::affine: return "affine";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::prelu: return "prelu";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::flatten: return "flatten";
    case LayerKind::l2_normalize: return "l2_normalize";
  }
  return "unknown";
}

LayerSpec LayerSpec::affine(int in, int out) {
  LayerSpec l;
  l.kind = LayerKind::affine;
  l.in = in;
  l.out = out;
  return l;
}

LayerSpec LayerSpec::conv2d(int in_ch, int out_ch, int kernel, int stride) {
  LayerSpec l;
  l.kind = LayerKind::conv2d;
  l.in = in_ch;
  l.out = out_ch;
  l.kernel = kernel;
  l.stride = stride;
  return l;
}

LayerSpec LayerSpec::prelu(int channels) {
  LayerSpec l;
  l.kind = LayerKind::prelu;
  l.channels = channels;
  return l;
}

LayerSpec LayerSpec::sigmoid() {
  LayerSpec l;
  l.kind = LayerKind::sigmoid;
  return l;
}

LayerSpec LayerSpec::flatten() { return LayerSpec{}; }

LayerSpec LayerSpec::l2_normalize() {
  LayerSpec l;
  l.kind = LayerKind::l2_normalize;
  return l;
}

namespace {

std::string describe_layer(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::affine: return fmt::format("affine({},{})", l.in, l.out);
    case LayerKind::conv2d:
      return fmt::format("conv({},{},k{},s{})", l.in, l.out, l.kernel, l.stride);
    case LayerKind::prelu: return fmt::format("prelu({})", l.channels);
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::flatten: return "flatten";
    case LayerKind::l2_normalize: return "l2norm";
  }
  return "?";
}

int conv_out(int n, int kernel, int stride) { return (n + 2 * (kernel / 2) - kernel) / stride + 1; }

}  // namespace

NetworkSpec::NetworkSpec(Shape input, std::vector<LayerSpec> layers)
    : input_(input), layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("NetworkSpec: at least one layer required");
  if (input_.size() <= 0) throw std::invalid_argument("NetworkSpec: empty input shape");
  Shape s = input_;
  shapes_.push_back(s);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    ParamSlice slice;
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument(fmt::format("NetworkSpec: layer {} ({}) on input {}x{}x{}: {}", i,
                                              describe_layer(l), s.c, s.h, s.w, why));
    };
    switch (l.kind) {
      case LayerKind::affine:
        if (l.in <= 0 || l.out <= 0) fail("widths must be positive");
        if (s.h != 1 || s.w != 1) fail("affine needs a flat input; insert flatten");
        if (s.c != l.in) fail("input width mismatch");
        slice.weight_rows = l.out;
        slice.weight_cols = l.in;
        slice.weight_size = static_cast<std::size_t>(l.out) * l.in;
        slice.bias_size = static_cast<std::size_t>(l.out);
        s = Shape{l.out, 1, 1};
        break;
      case LayerKind::conv2d:
        if (l.in <= 0 || l.out <= 0) fail("channel counts must be positive");
        if (l.kernel <= 0 || l.stride <= 0) fail("kernel and stride must be positive");
        if (s.c != l.in) fail("input channel mismatch");
        if (conv_out(s.h, l.kernel, l.stride) <= 0 || conv_out(s.w, l.kernel, l.stride) <= 0)
          fail("kernel larger than padded input");
        slice.weight_rows = l.out;
        slice.weight_cols = l.in * l.kernel * l.kernel;
        slice.weight_size = static_cast<std::size_t>(slice.weight_rows) * slice.weight_cols;
        slice.bias_size = static_cast<std::size_t>(l.out);
        s = Shape{l.out, conv_out(s.h, l.kernel, l.stride), conv_out(s.w, l.kernel, l.stride)};
        break;
      case LayerKind::prelu:
        if (l.channels <= 0) fail("slope count must be positive");
        if (s.c != l.channels) fail("slope count must equal input channels");
        slice.weight_rows = 1;
        slice.weight_cols = l.channels;
        slice.weight_size = static_cast<std::size_t>(l.channels);
        break;
      case LayerKind::sigmoid:
        break;
      case LayerKind::flatten:
        s = Shape{s.size(), 1, 1};
        break;
      case LayerKind::l2_normalize:
        if (s.h != 1 || s.w != 1) fail("l2_normalize needs a flat input");
        break;
    }
    slice.weight_offset = param_count_;
    param_count_ += slice.weight_size;
    slice.bias_offset = param_count_;
    param_count_ += slice.bias_size;
    slices_.push_back(slice);
    shapes_.push_back(s);
  }
}

std::string NetworkSpec::describe() const {
  std::string out = fmt::format("in={}x{}x{}", input_.c, input_.h, input_.w);
  for (const auto& l : layers_) out += "|" + describe_layer(l);
  return out;
}

std::uint64_t NetworkSpec::hash() const { return Hasher{}.str(describe()).digest(); }

NetworkSpec NetworkSpec::prefix(std::size_t n) const {
  if (n == 0 || n > layers_.size()) throw std::invalid_argument("NetworkSpec::prefix: bad length");
  return NetworkSpec(input_, std::vector<LayerSpec>(layers_.begin(), layers_.begin() + static_cast<long>(n)));
}

NetworkSpec NetworkSpec::extended(const std::vector<LayerSpec>& more) const {
  std::vector<LayerSpec> all = layers_;
  all.insert(all.end(), more.begin(), more.end());
  return NetworkSpec(input_, std::move(all));
}

Eigen::Map<const Matrix> ParamSet::weight(const NetworkSpec& spec, std::size_t layer) const {
  const ParamSlice& s = spec.slices()[layer];
  return {values.data() + s.weight_offset, s.weight_rows, s.weight_cols};
}

Eigen::Map<Matrix> ParamSet::weight(const NetworkSpec& spec, std::size_t layer) {
  const ParamSlice& s = spec.slices()[layer];
  return {values.data() + s.weight_offset, s.weight_rows, s.weight_cols};
}

Eigen::Map<const Vector> ParamSet::bias(const NetworkSpec& spec, std::size_t layer) const {
  const ParamSlice& s = spec.slices()[layer];
  return {values.data() + s.bias_offset, static_cast<Eigen::Index>(s.bias_size)};
}

Eigen::Map<Vector> ParamSet::bias(const NetworkSpec& spec, std::size_t layer) {
  const ParamSlice& s = spec.slices()[layer];
  return {values.data() + s.bias_offset, static_cast<Eigen::Index>(s.bias_size)};
}

ParamSet zero_params(const NetworkSpec& spec) {
  ParamSet p;
  p.values = Vector::Zero(static_cast<Eigen::Index>(spec.param_count()));
  return p;
}

ParamSet init_params(const NetworkSpec& spec, SeededRng& rng) {
  ParamSet p = zero_params(spec);
  for (std::size_t i = 0; i < spec.layers().size(); ++i) {
    const LayerSpec& l = spec.layers()[i];
    auto w = p.weight(spec, i);
    if (l.kind == LayerKind::affine || l.kind == LayerKind::conv2d) {
      const double stddev = std::sqrt(2.0 / w.cols());
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = stddev * rng.normal();
    } else if (l.kind == LayerKind::prelu) {
      w.setConstant(0.25);
    }
  }
  return p;
}

struct TapeAccess {
  static Tape& init(Tape& t, const NetworkSpec& spec, const ParamSet& params) {
    t.spec_ = &spec;
    t.params_ = &params;
    t.inputs_.assign(spec.layers().size(), Vector{});
    t.columns_.assign(spec.layers().size(), Matrix{});
    return t;
  }
  static std::vector<Vector>& inputs(Tape& t) { return t.inputs_; }
  static std::vector<Matrix>& columns(Tape& t) { return t.columns_; }
  static Vector& output(Tape& t) { return t.output_; }
  static const NetworkSpec& spec(const Tape& t) { return *t.spec_; }
  static const ParamSet& params(const Tape& t) { return *t.params_; }
  static bool& consumed(Tape& t) { return t.consumed_; }
};

namespace {

void im2col(const Vector& x, const Shape& in, int kernel, int stride, const Shape& out, Matrix& cols) {
  const int pad = kernel / 2;
  cols.resize(static_cast<Eigen::Index>(in.c) * kernel * kernel, static_cast<Eigen::Index>(out.h) * out.w);
  for (int c = 0; c < in.c; ++c) {
    for (int ki = 0; ki < kernel; ++ki) {
      for (int kj = 0; kj < kernel; ++kj) {
        double* row = cols.row((c * kernel + ki) * kernel + kj).data();
        for (int oh = 0; oh < out.h; ++oh) {
          const int ih = oh * stride - pad + ki;
          for (int ow = 0; ow < out.w; ++ow) {
            const int iw = ow * stride - pad + kj;
            const bool inside = ih >= 0 && ih < in.h && iw >= 0 && iw < in.w;
            row[oh * out.w + ow] = inside ? x((c * in.h + ih) * in.w + iw) : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const Matrix& cols, const Shape& in, int kernel, int stride, const Shape& out, Vector& dx) {
  const int pad = kernel / 2;
  dx = Vector::Zero(in.size());
  for (int c = 0; c < in.c; ++c) {
    for (int ki = 0; ki < kernel; ++ki) {
      for (int kj = 0; kj < kernel; ++kj) {
        const double* row = cols.row((c * kernel + ki) * kernel + kj).data();
        for (int oh = 0; oh < out.h; ++oh) {
          const int ih = oh * stride - pad + ki;
          if (ih < 0 || ih >= in.h) continue;
          for (int ow = 0; ow < out.w; ++ow) {
            const int iw = ow * stride - pad + kj;
            if (iw < 0 || iw >= in.w) continue;
            dx((c * in.h + ih) * in.w + iw) += row[oh * out.w + ow];
          }
        }
      }
    }
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

constexpr double kNormFloor = 1e-12;

}  // namespace

ForwardResult forward(const NetworkSpec& spec, const ParamSet& params, const Vector& x) {
  if (x.size() != spec.input_shape().size())
    throw std::invalid_argument(fmt::format("forward: input has {} entries, network expects {}",
                                            x.size(), spec.input_shape().size()));
  if (static_cast<std::size_t>(params.values.size()) != spec.param_count())
    throw std::invalid_argument(fmt::format("forward: {} parameters, network expects {}",
                                            params.values.size(), spec.param_count()));
  ForwardResult result;
  Tape& tape = TapeAccess::init(result.tape, spec, params);
  Vector cur = x;
  for (std::size_t i = 0; i < spec.layers().size(); ++i) {
    const LayerSpec& l = spec.layers()[i];
    const Shape& in = spec.shape_before(i);
    const Shape& out = spec.shape_before(i + 1);
    Vector next;
    switch (l.kind) {
      case LayerKind::affine:
        next = params.weight(spec, i) * cur + params.bias(spec, i);
        break;
      case LayerKind::conv2d: {
        Matrix& cols = TapeAccess::columns(tape)[i];
        im2col(cur, in, l.kernel, l.stride, out, cols);
        Matrix y = params.weight(spec, i) * cols;
        y.colwise() += params.bias(spec, i);
        next = Eigen::Map<const Vector>(y.data(), y.size());
        break;
      }
      case LayerKind::prelu: {
        next = cur;
        const auto slopes = params.weight(spec, i);
        const int plane = in.h * in.w;
        for (int c = 0; c < in.c; ++c) {
          const double a = slopes(0, c);
          for (int k = 0; k < plane; ++k) {
            double& v = next(c * plane + k);
            if (!(v > 0.0)) v *= a;
          }
        }
        break;
      }
      case LayerKind::sigmoid:
        next = cur.unaryExpr([](double z) { return sigmoid(z); });
        break;
      case LayerKind::flatten:
        next = cur;
        break;
      case LayerKind::l2_normalize:
        next = cur / std::max(cur.norm(), kNormFloor);
        break;
    }
    TapeAccess::inputs(tape)[i] = std::move(cur);
    cur = std::move(next);
  }
  TapeAccess::output(tape) = cur;
  result.output = std::move(cur);
  return result;
}

Vector evaluate(const NetworkSpec& spec, const ParamSet& params, const Vector& x) {
  return forward(spec, params, x).output;
}

GradResult backward(Tape& tape, const Vector& upstream, bool want_param_grads) {
  if (TapeAccess::consumed(tape)) throw std::logic_error("backward: tape already consumed");
  const NetworkSpec& spec = TapeAccess::spec(tape);
  const ParamSet& params = TapeAccess::params(tape);
  if (upstream.size() != spec.output_shape().size())
    throw std::invalid_argument(fmt::format("backward: upstream has {} entries, output has {}",
                                            upstream.size(), spec.output_shape().size()));
  TapeAccess::consumed(tape) = true;

  GradResult g;
  if (want_param_grads) g.params = Vector::Zero(params.values.size());
  auto& inputs = TapeAccess::inputs(tape);
  auto& columns = TapeAccess::columns(tape);

  Vector grad = upstream;
  Vector out_value = TapeAccess::output(tape);
  for (std::size_t idx = spec.layers().size(); idx-- > 0;) {
    const LayerSpec& l = spec.layers()[idx];
    const Shape& in = spec.shape_before(idx);
    const Shape& out = spec.shape_before(idx + 1);
    const ParamSlice& slice = spec.slices()[idx];
    const Vector& x = inputs[idx];
    Vector dx;
    switch (l.kind) {
      case LayerKind::affine: {
        const auto w = params.weight(spec, idx);
        if (want_param_grads) {
          Eigen::Map<Matrix> dw(g.params.data() + slice.weight_offset, slice.weight_rows, slice.weight_cols);
          dw.noalias() += grad * x.transpose();
          g.params.segment(static_cast<Eigen::Index>(slice.bias_offset), out.c) += grad;
        }
        dx = w.transpose() * grad;
        break;
      }
      case LayerKind::conv2d: {
        const auto w = params.weight(spec, idx);
        Eigen::Map<const Matrix> dy(grad.data(), out.c, static_cast<Eigen::Index>(out.h) * out.w);
        const Matrix& cols = columns[idx];
        if (want_param_grads) {
          Eigen::Map<Matrix> dw(g.params.data() + slice.weight_offset, slice.weight_rows, slice.weight_cols);
          dw.noalias() += dy * cols.transpose();
          g.params.segment(static_cast<Eigen::Index>(slice.bias_offset), out.c) += dy.rowwise().sum();
        }
        Matrix dcols = w.transpose() * dy;
        col2im(dcols, in, l.kernel, l.stride, out, dx);
        break;
      }
      case LayerKind::prelu: {
        dx = grad;
        const auto slopes = params.weight(spec, idx);
        const int plane = in.h * in.w;
        for (int c = 0; c < in.c; ++c) {
          const double a = slopes(0, c);
          double da = 0.0;
          for (int k = 0; k < plane; ++k) {
            const int j = c * plane + k;
            if (!(x(j) > 0.0)) {
              da += grad(j) * x(j);
              dx(j) *= a;
            }
          }
          if (want_param_grads) g.params(static_cast<Eigen::Index>(slice.weight_offset) + c) += da;
        }
        break;
      }
      case LayerKind::sigmoid: {
        const Vector y = x.unaryExpr([](double z) { return sigmoid(z); });
        dx = grad.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
        break;
      }
      case LayerKind::flatten:
        dx = grad;
        break;
      case LayerKind::l2_normalize: {
        const double n = std::max(x.norm(), kNormFloor);
        const Vector y = x / n;
        dx = (grad - y * y.dot(grad)) / n;
        break;
      }
    }
    grad = std::move(dx);
  }
  g.input = std::move(grad);
  inputs.clear();
  columns.clear();
  return g;
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport grad_check(const NetworkSpec& spec, const ParamSet& params, const Vector& x,
                           SeededRng& rng, std::size_t coordinates, double h) {
  const Vector u = gaussian_draw(rng, static_cast<std::size_t>(spec.output_shape().size()));
  auto objective = [&](const ParamSet& p, const Vector& in) { return u.dot(evaluate(spec, p, in)); };

  ForwardResult fr = forward(spec, params, x);
  const GradResult g = backward(fr.tape, u);

  const std::size_t n_params = spec.param_count();
  const std::size_t n_input = static_cast<std::size_t>(x.size());
  const std::size_t total = n_params + n_input;
  std::vector<std::size_t> picks;
  if (total <= coordinates) {
    for (std::size_t i = 0; i < total; ++i) picks.push_back(i);
  } else {
    for (std::size_t i = 0; i < coordinates; ++i) picks.push_back(rng.uniform_index(total));
  }

  GradCheckReport report;
  ParamSet p = params;
  Vector xin = x;
  for (std::size_t idx : picks) {
    double analytic = 0.0;
    double numeric = 0.0;
    const bool is_input = idx >= n_params;
    if (!is_input) {
      const double orig = p.values(static_cast<Eigen::Index>(idx));
      p.values(static_cast<Eigen::Index>(idx)) = orig + h;
      const double fp = objective(p, xin);
      p.values(static_cast<Eigen::Index>(idx)) = orig - h;
      const double fm = objective(p, xin);
      p.values(static_cast<Eigen::Index>(idx)) = orig;
      numeric = (fp - fm) / (2.0 * h);
      analytic = g.params(static_cast<Eigen::Index>(idx));
    } else {
      const auto j = static_cast<Eigen::Index>(idx - n_params);
      const double orig = xin(j);
      xin(j) = orig + h;
      const double fp = objective(p, xin);
      xin(j) = orig - h;
      const double fm = objective(p, xin);
      xin(j) = orig;
      numeric = (fp - fm) / (2.0 * h);
      analytic = g.input(j);
    }
    const double rel = relative_error(analytic, numeric);
    report.max_abs_error = std::max(report.max_abs_error, std::abs(analytic - numeric));
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = is_input ? idx - n_params : idx;
      report.worst_is_input = is_input;
    }
    ++report.coordinates;
  }
  return report;
}

}  // namespace imsp::nn
