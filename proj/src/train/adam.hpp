#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "diff/tape.hpp"
#include "net/network.hpp"

namespace sparsym::train {

struct AdamConfig {
  double learning_rate = 0.0015;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::map<std::string, diff::Array> m, v;
  std::uint64_t t = 0;
};

/// One bias-corrected Adam update of every parameter in `params` (frozen
/// entries are skipped and keep zero moments). All gradients are checked
/// before anything is modified; a non-finite gradient throws
/// ErrorCode::Numeric naming the parameter.
void adam_step(std::span<const net::ParamRef> params, const diff::Gradients& grads,
               AdamState& state, const AdamConfig& config);

/// Zeroes the moments of the given entries of one parameter.
void reset_moments(AdamState& state, const std::string& name, const std::vector<std::uint8_t>& mask);

}  // namespace sparsym::train
