#pragma once

#include <string>
#include <vector>

#include "diff/tape.hpp"

namespace sparsym::diff {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;  // "name[flat index]"
  std::size_t checked = 0;
  // Surrogate primitive nodes whose backward rule was masked out of the
  // comparison (they propagate zero, like the step they stand in for).
  std::size_t surrogate_nodes_excluded = 0;
};

/// Compares the tape's backward pass against central differences of the
/// scalar objective <seed, output>. Relative error is
/// |analytic - numeric| / max(1, |numeric|). `params` empty means every
/// differentiable input. The tape is left forwarded at the original bindings.
GradCheckReport grad_check(Tape& tape, Bindings bindings, Var output, const Array& seed,
                           const std::vector<std::string>& params = {}, double eps = 1e-6);

}  // namespace sparsym::diff
