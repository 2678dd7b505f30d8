#include "train/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "common/error.hpp"
#include "loss/regloss.hpp"
#include "net/graph.hpp"

namespace sparsym::train {

double auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) fail(ErrorCode::Shape, "auc: score/label length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Walk groups of tied scores in ascending order; each positive beats every
  // negative seen in earlier groups and ties with negatives in its own group.
  double concordant = 0.0;
  double negatives_below = 0.0;
  double positives = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double pos = 0.0, neg = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] > 0.5 ? pos : neg) += 1.0;
      ++j;
    }
    concordant += pos * negatives_below + 0.5 * pos * neg;
    negatives_below += neg;
    positives += pos;
    i = j;
  }
  const double negatives = negatives_below;
  if (positives == 0.0 || negatives == 0.0) {
    fail(ErrorCode::InvalidArgument, "auc needs at least one positive and one negative");
  }
  return concordant / (positives * negatives);
}

double accuracy(const Array& predictions, const Array& labels) {
  if (predictions.shape() != labels.shape()) {
    fail(ErrorCode::Shape, "accuracy: " + std::to_string(predictions.cols()) + " outputs vs " +
                               std::to_string(labels.cols()) + " label columns");
  }
  const std::size_t n = predictions.rows(), k = predictions.cols();
  if (n == 0) fail(ErrorCode::InvalidArgument, "accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (k == 1) {
      hits += (predictions[r] > 0.5) == (labels[r] > 0.5);
      continue;
    }
    const double* p = &predictions[r * k];
    const double* y = &labels[r * k];
    hits += std::max_element(p, p + k) - p == std::max_element(y, y + k) - y;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

Metrics evaluate(const Array& predictions, const Array& labels, data::Task task) {
  if (predictions.shape() != labels.shape()) {
    fail(ErrorCode::Shape, "evaluate: " + std::to_string(predictions.cols()) +
                               " outputs but " + std::to_string(labels.cols()) + " label columns");
  }
  Metrics m;
  m.mse = loss::mse(predictions, labels);
  if (task != data::Task::Classification) return m;
  m.accuracy = accuracy(predictions, labels);
  const std::size_t n = predictions.rows(), k = predictions.cols();
  std::vector<double> s(n), y(n);
  for (std::size_t c = 0; c < k; ++c) {
    bool has_pos = false, has_neg = false;
    for (std::size_t r = 0; r < n; ++r) {
      s[r] = predictions[r * k + c];
      y[r] = labels[r * k + c];
      (y[r] > 0.5 ? has_pos : has_neg) = true;
    }
    if (has_pos && has_neg) {
      m.auc.emplace_back(auc(s, y));
    } else {
      m.auc.emplace_back(std::nullopt);
    }
  }
  return m;
}

Metrics evaluate(const net::Network& net, const data::Dataset& ds) {
  return evaluate(net::forward_masked(net, ds.features), ds.labels, ds.task);
}

Array predict(const std::vector<expr::Expr>& expressions, const Array& features) {
  const std::size_t n = features.rows(), f = features.cols(), k = expressions.size();
  Array out(diff::Shape{n, k});
  for (std::size_t c = 0; c < k; ++c) expr::validate(expressions[c], f);
  for (std::size_t r = 0; r < n; ++r) {
    std::span<const double> row(&features[r * f], f);
    for (std::size_t c = 0; c < k; ++c) out[r * k + c] = expr::eval(expressions[c], row);
  }
  return out;
}

Metrics evaluate(const std::vector<expr::Expr>& expressions, const data::Dataset& ds) {
  if (expressions.size() != ds.n_output()) {
    fail(ErrorCode::Shape, std::to_string(expressions.size()) + " expressions for " +
                               std::to_string(ds.n_output()) + " outputs");
  }
  return evaluate(predict(expressions, ds.features), ds.labels, ds.task);
}

}  // namespace sparsym::train
