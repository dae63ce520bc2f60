#include "imsp/nn/checkpoint.hpp"

#include <array>
#include <fstream>

#include <fmt/format.h>

#include "imsp/core/binary_io.hpp"
#include "imsp/core/hash.hpp"

namespace imsp::nn {

namespace {
constexpr std::array<char, 4> kMagic{'I', 'M', 'N', 'N'};
}

void write_params(std::ostream& out, const NetworkSpec& spec, const ParamSet& params) {
  if (static_cast<std::size_t>(params.values.size()) != spec.param_count())
    throw std::invalid_argument("write_params: parameter count does not match spec");
  out.write(kMagic.data(), kMagic.size());
  write_u64(out, spec.hash());
  write_u32(out, static_cast<std::uint32_t>(spec.layers().size()));
  for (std::size_t i = 0; i < spec.layers().size(); ++i) {
    write_matrix(out, Matrix(params.weight(spec, i)));
    write_vector(out, Vector(params.bias(spec, i)));
  }
  if (!out) throw std::runtime_error("write_params: stream error");
}

ParamSet read_params(std::istream& in, const NetworkSpec& spec) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("checkpoint: missing IMNN magic");
  const std::uint64_t hash = read_u64(in);
  if (hash != spec.hash())
    throw FormatError(fmt::format("checkpoint: spec hash {} does not match network {} ({})", hex64(hash),
                                  hex64(spec.hash()), spec.describe()));
  const std::uint32_t layers = read_u32(in);
  if (layers != spec.layers().size())
    throw FormatError(fmt::format("checkpoint: {} layers stored, network has {}", layers, spec.layers().size()));
  ParamSet p = zero_params(spec);
  for (std::size_t i = 0; i < layers; ++i) {
    const Matrix w = read_matrix(in);
    const Vector b = read_vector(in);
    auto wt = p.weight(spec, i);
    auto bt = p.bias(spec, i);
    const bool empty_w = wt.size() == 0 && w.size() == 0;
    if (!empty_w && (w.rows() != wt.rows() || w.cols() != wt.cols()))
      throw FormatError(fmt::format("checkpoint: layer {} weight shape {}x{}, expected {}x{}", i, w.rows(),
                                    w.cols(), wt.rows(), wt.cols()));
    if (b.size() != bt.size())
      throw FormatError(fmt::format("checkpoint: layer {} bias size {}, expected {}", i, b.size(), bt.size()));
    if (!empty_w) wt = w;
    bt = b;
  }
  if (!p.values.allFinite()) throw FormatError("checkpoint: non-finite parameter");
  return p;
}

void save_params(const std::filesystem::path& path, const NetworkSpec& spec, const ParamSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  write_params(out, spec, params);
}

ParamSet load_params(const std::filesystem::path& path, const NetworkSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  return read_params(in, spec);
}

std::uint64_t params_hash(const ParamSet& params) { return Hasher{}.vec(params.values).digest(); }

}  // namespace imsp::nn
