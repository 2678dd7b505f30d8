#include "diff/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace sparsym::diff {

namespace {

double objective(const Tape& tape, Var output, const Array& seed) {
  const Array& out = tape.value(output);
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) total += seed[i] * out[i];
  return total;
}

}  // namespace

GradCheckReport grad_check(Tape& tape, Bindings bindings, Var output, const Array& seed,
                           const std::vector<std::string>& params, double eps) {
  GradCheckReport report;
  report.surrogate_nodes_excluded = tape.surrogate_count();

  tape.forward(bindings);
  const Gradients analytic = tape.backward(output, seed, BackwardMode::SmoothOnly);

  std::vector<std::string> names = params.empty() ? tape.input_names(true) : params;
  for (const auto& name : names) {
    auto it = bindings.find(name);
    auto git = analytic.find(name);
    if (it == bindings.end() || git == analytic.end()) {
      fail(ErrorCode::InvalidArgument, "grad_check: '" + name + "' is not a differentiable input");
    }
    Array& value = it->second;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double original = value[i];
      value[i] = original + eps;
      tape.forward(bindings);
      const double plus = objective(tape, output, seed);
      value[i] = original - eps;
      tape.forward(bindings);
      const double minus = objective(tape, output, seed);
      value[i] = original;

      const double numeric = (plus - minus) / (2.0 * eps);
      const double err =
          std::abs(git->second[i] - numeric) / std::max(1.0, std::abs(numeric));
      ++report.checked;
      if (err > report.max_rel_error || report.worst_param.empty()) {
        if (err >= report.max_rel_error) {
          report.max_rel_error = err;
          report.worst_param = name + "[" + std::to_string(i) + "]";
        }
      }
    }
  }
  tape.forward(bindings);
  return report;
}

}  // namespace sparsym::diff
