#pragma once

#include <cstddef>
#include <vector>

namespace sparsym::expr {

struct ParetoPoint {
  std::size_t complexity = 0;
  double score = 0.0;  // higher is better (accuracy, AUC, or -mse)
  std::size_t id = 0;  // caller's label, carried through

  friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

/// Points not dominated by another point with <= complexity and >= score
/// (one strictly). Among equal scores the lowest complexity survives; among
/// exact duplicates the first. Sorted by complexity ascending.
std::vector<ParetoPoint> pareto_front(std::vector<ParetoPoint> points);

}  // namespace sparsym::expr
