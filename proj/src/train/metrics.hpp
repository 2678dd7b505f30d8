#pragma once

#include <optional>
#include <span>
#include <vector>

#include "data/dataset.hpp"
#include "expr/expr.hpp"
#include "net/network.hpp"

namespace sparsym::train {

using diff::Array;

struct Metrics {
  double mse = 0.0;
  std::optional<double> accuracy;           // classification only
  std::vector<std::optional<double>> auc;   // per output; empty for regression,
                                            // nullopt where a class is absent
};

/// Rank estimator: (concordant + ties / 2) / (P N) over all positive-negative
/// pairs. Labels are 0 or 1. Throws when only one class is present.
double auc(std::span<const double> scores, std::span<const double> labels);

/// Argmax of predictions against argmax of the one-hot labels. A single
/// output is read as a binary score thresholded at 0.5.
double accuracy(const Array& predictions, const Array& labels);

Metrics evaluate(const Array& predictions, const Array& labels, data::Task task);
Metrics evaluate(const net::Network& net, const data::Dataset& ds);

/// Evaluates each expression on every row: [N x expressions.size()].
Array predict(const std::vector<expr::Expr>& expressions, const Array& features);
Metrics evaluate(const std::vector<expr::Expr>& expressions, const data::Dataset& ds);

}  // namespace sparsym::train
