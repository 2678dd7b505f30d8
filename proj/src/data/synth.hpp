#pragma once

#include <cstdint>
#include <string>

#include "data/dataset.hpp"
#include "expr/expr.hpp"

namespace sparsym::data {

struct SynthSpec {
  std::string formula_text;
  std::size_t n_input = 1;
  std::size_t n_samples = 1000;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

/// Features ~ Uniform(-1, 1); labels = formula(x) + Normal(0, noise_std).
/// Indices the formula does not use are distractor features.
Dataset synth_generate(const expr::Expr& formula, std::size_t n_input, std::size_t n_samples,
                       double noise_std, std::uint64_t seed);
Dataset synth_generate(const SynthSpec& spec);

}  // namespace sparsym::data
