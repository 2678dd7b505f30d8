#include "expr/pareto.hpp"

#include <algorithm>
#include <cmath>

namespace sparsym::expr {

std::vector<ParetoPoint> pareto_front(std::vector<ParetoPoint> points) {
  std::stable_sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.complexity != b.complexity) return a.complexity < b.complexity;
    return a.score > b.score;
  });
  std::vector<ParetoPoint> front;
  for (const auto& p : points) {
    if (std::isnan(p.score)) continue;
    if (front.empty() || p.score > front.back().score) front.push_back(p);
  }
  return front;
}

}  // namespace sparsym::expr
