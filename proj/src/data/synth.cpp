#include "data/synth.hpp"

#include <random>

#include "common/error.hpp"
#include "expr/text.hpp"

namespace sparsym::data {

Dataset synth_generate(const expr::Expr& formula, std::size_t n_input, std::size_t n_samples,
                       double noise_std, std::uint64_t seed) {
  if (n_input == 0 || n_samples == 0) fail(ErrorCode::Config, "synthetic dataset needs n_input and n_samples > 0");
  if (!(noise_std >= 0.0)) fail(ErrorCode::Config, "noise_std must be >= 0");
  expr::validate(formula, n_input);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);

  Dataset ds;
  ds.task = Task::Regression;
  ds.features = Array(diff::Shape{n_samples, n_input});
  ds.labels = Array(diff::Shape{n_samples, 1});
  for (std::size_t r = 0; r < n_samples; ++r) {
    double* row = &ds.features[r * n_input];
    for (std::size_t c = 0; c < n_input; ++c) row[c] = uniform(rng);
    double y = expr::eval(formula, std::span<const double>(row, n_input));
    if (noise_std > 0.0) y += noise(rng);
    ds.labels[r] = y;
  }
  return ds;
}

Dataset synth_generate(const SynthSpec& spec) {
  return synth_generate(expr::parse_text(spec.formula_text), spec.n_input, spec.n_samples,
                        spec.noise_std, spec.seed);
}

}  // namespace sparsym::data
