#pragma once

#include "diff/tape.hpp"
#include "net/network.hpp"

namespace sparsym::net {

struct GraphOptions {
  bool with_loss = true;
  // > 0 adds the smoothed L0.5 penalty sum over all weights, knee at `l05_a`.
  double l05_a = 0.0;
};

/// The network's forward pass (and optionally its loss terms) recorded on a
/// tape. Built once per architecture and re-run for every batch.
///
/// Pruned networks apply, in order: input gates x * theta(1 - t_in); per
/// layer the masked affine map with W * theta(|W| - t_W); unary blend
/// f(z) theta(1 - t) + z (1 - theta(1 - t)) on the first u columns; binary
/// blend g(a, b) theta(1 - t) + (a + b)(1 - theta(1 - t)) on the pairs that
/// follow; finally the masked linear output layer.
class ForwardGraph {
 public:
  explicit ForwardGraph(const Network& net, GraphOptions options = {});

  diff::Tape& tape() { return tape_; }
  const diff::Tape& tape() const { return tape_; }

  /// Parameters plus the batch (and labels, if the graph has a loss).
  diff::Bindings bindings(const Network& net, const Array& x, const Array* y = nullptr) const;
  /// Forward only; returns the [N x n_output] prediction.
  const Array& run(const Network& net, const Array& x, const Array* y = nullptr);

  diff::Var x, y, prediction;
  diff::Var mse;
  diff::Var reg_weight, reg_input, reg_unary, reg_binary;
  diff::Var l05;

 private:
  diff::Tape tape_;
  GraphOptions options_;
  std::size_t input_dim_ = 0;
};

/// Masked forward pass for a batch [N x input_dim] -> [N x output_dim].
Array forward_masked(const Network& net, const Array& batch);

/// Smoothed L0.5 penalty: |w|^0.5 for |w| >= a, otherwise
/// (-w^4/(8a^3) + 3w^2/(4a) + 3a/8)^0.5.
double l05_star(double w, double a);
double l05_star_derivative(double w, double a);
diff::PrimitiveHandle make_l05_primitive(double a);

}  // namespace sparsym::net
