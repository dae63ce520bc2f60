#pragma once

#include <filesystem>
#include <iosfwd>

#include "imsp/nn/network.hpp"

namespace imsp::nn {

// "IMNN", u64 spec hash, u32 layer count, then for every layer a weight and
// a bias record in the IMSP container (empty records for parameterless layers).
void write_params(std::ostream& out, const NetworkSpec& spec, const ParamSet& params);
ParamSet read_params(std::istream& in, const NetworkSpec& spec);

void save_params(const std::filesystem::path& path, const NetworkSpec& spec, const ParamSet& params);
ParamSet load_params(const std::filesystem::path& path, const NetworkSpec& spec);

std::uint64_t params_hash(const ParamSet& params);

}  // namespace imsp::nn
