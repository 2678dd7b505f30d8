#include "net/graph.hpp"

#include <cmath>

#include "common/error.hpp"

namespace sparsym::net {

using diff::Shape;
using diff::Var;

double l05_star(double w, double a) {
  const double m = std::abs(w);
  if (m >= a) return std::sqrt(m);
  const double w2 = w * w;
  return std::sqrt(-w2 * w2 / (8.0 * a * a * a) + 3.0 * w2 / (4.0 * a) + 3.0 * a / 8.0);
}

double l05_star_derivative(double w, double a) {
  const double m = std::abs(w);
  if (m >= a) return (w > 0 ? 0.5 : -0.5) / std::sqrt(m);
  const double inner_grad = -w * w * w / (2.0 * a * a * a) + 3.0 * w / (2.0 * a);
  return 0.5 * inner_grad / l05_star(w, a);
}

diff::PrimitiveHandle make_l05_primitive(double a) {
  auto p = std::make_shared<diff::Primitive>();
  p->name = "l05star";
  p->arity = 1;
  p->forward1 = [a](double w) { return l05_star(w, a); };
  p->backward1 = [a](double w) { return l05_star_derivative(w, a); };
  return p;
}

namespace {

// theta(|w| - t) * w
Var masked_weights(diff::Tape& tape, Var w, Var t) {
  Var keep = tape.apply("step", tape.sub(tape.apply("abs", w), t));
  return tape.mul(w, keep);
}

// theta(1 - t), the open/closed state of a unit-weight gate.
Var gate_open(diff::Tape& tape, Var t) { return tape.apply("step", tape.affine(t, -1.0, 1.0)); }

}  // namespace

ForwardGraph::ForwardGraph(const Network& net, GraphOptions options)
    : options_(options), input_dim_(net.spec.input_dim) {
  const bool pruned = net.gating == Gating::Pruned;
  const auto& registry = tape_.registry();
  const std::size_t n_layers = net.spec.layers.size();

  std::vector<Var> weight_vars, weight_thresholds, unary_thresholds, binary_thresholds;
  Var input_threshold{};

  x = tape_.input("x", {diff::kAnyDim, net.spec.input_dim}, false);
  Var h = x;
  if (pruned) {
    input_threshold = tape_.input("in.t", {net.spec.input_dim});
    h = tape_.mul_row(x, gate_open(tape_, input_threshold));
  }

  auto affine_layer = [&](std::size_t k, Var input) {
    const auto& layer = net.linear[k];
    const std::string p = "L" + std::to_string(k) + ".";
    Var w = tape_.input(p + "w", layer.weight.weights.shape());
    Var b = tape_.input(p + "b", layer.bias.weights.shape());
    weight_vars.push_back(w);
    weight_vars.push_back(b);
    if (pruned) {
      Var tw = tape_.input(p + "tw", layer.weight.weights.shape());
      Var tb = tape_.input(p + "tb", layer.bias.weights.shape());
      weight_thresholds.push_back(tw);
      weight_thresholds.push_back(tb);
      w = masked_weights(tape_, w, tw);
      b = masked_weights(tape_, b, tb);
    }
    return tape_.add_row(tape_.matmul(input, w), b);
  };

  const auto add_prim = registry.get("add");
  for (std::size_t k = 0; k < n_layers; ++k) {
    const auto& ops = net.spec.layers[k];
    const std::string p = "L" + std::to_string(k) + ".";
    Var z = affine_layer(k, h);
    const std::size_t u = ops.u(), b = ops.b();

    Var unary_out{}, binary_out{};
    if (pruned) {
      Var tu = tape_.input(p + "tu", {u});
      Var tbin = tape_.input(p + "tbin", {b});
      if (u > 0) unary_thresholds.push_back(tu);
      if (b > 0) binary_thresholds.push_back(tbin);
    }
    if (u > 0) {
      std::vector<diff::PrimitiveHandle> prims;
      for (const auto& name : ops.unary) prims.push_back(registry.get(name));
      Var zu = tape_.slice_cols(z, 0, u);
      Var fu = tape_.apply_columns(zu, prims);
      if (pruned) {
        Var open = gate_open(tape_, unary_thresholds.back());
        Var closed = tape_.affine(open, -1.0, 1.0);
        fu = tape_.add(tape_.mul_row(fu, open), tape_.mul_row(zu, closed));
      }
      unary_out = fu;
    }
    if (b > 0) {
      std::vector<diff::PrimitiveHandle> prims;
      for (const auto& name : ops.binary) prims.push_back(registry.get(name));
      Var zb = tape_.slice_cols(z, u, u + 2 * b);
      Var gb = tape_.apply_pairs(zb, prims);
      if (pruned) {
        Var sum = tape_.apply_pairs(zb, std::vector<diff::PrimitiveHandle>(b, add_prim));
        Var open = gate_open(tape_, binary_thresholds.back());
        Var closed = tape_.affine(open, -1.0, 1.0);
        gb = tape_.add(tape_.mul_row(gb, open), tape_.mul_row(sum, closed));
      }
      binary_out = gb;
    }
    if (u > 0 && b > 0) h = tape_.concat_cols(unary_out, binary_out);
    else h = u > 0 ? unary_out : binary_out;
  }
  prediction = affine_layer(n_layers, h);

  if (!options_.with_loss) return;

  y = tape_.input("y", {diff::kAnyDim, net.spec.output_dim}, false);
  mse = tape_.mean(tape_.apply("square", tape_.sub(prediction, y)));

  auto total_of = [&](const std::vector<Var>& vars, auto&& per_var) {
    Var total{};
    for (Var v : vars) {
      Var s = per_var(v);
      total = total.valid() ? tape_.add(total, s) : s;
    }
    return total;
  };
  auto zero = [&] { return tape_.constant(diff::Array::scalar(0.0)); };

  if (pruned) {
    // (1/n_weight) sum_i exp(-T_i) over all weight and bias thresholds.
    const double n_weight = static_cast<double>(net.n_weight());
    Var sum_exp = total_of(weight_thresholds, [&](Var t) {
      return tape_.sum(tape_.apply("exp", tape_.affine(t, -1.0, 0.0)));
    });
    reg_weight = tape_.affine(sum_exp, 1.0 / n_weight, 0.0);

    // exp(-(1/n_aux) sum_i T_i) per auxiliary category; 0 for empty categories.
    auto aux_reg = [&](const std::vector<Var>& vars, std::size_t n) {
      if (n == 0) return zero();
      Var s = total_of(vars, [&](Var t) { return tape_.sum(t); });
      return tape_.apply("exp", tape_.affine(s, -1.0 / static_cast<double>(n), 0.0));
    };
    reg_input = aux_reg({input_threshold}, net.n_input());
    reg_unary = aux_reg(unary_thresholds, net.n_unary());
    reg_binary = aux_reg(binary_thresholds, net.n_binary());
  }

  if (options_.l05_a > 0.0) {
    auto prim = make_l05_primitive(options_.l05_a);
    l05 = total_of(weight_vars, [&](Var w) { return tape_.sum(tape_.apply(prim, w)); });
  }
}

diff::Bindings ForwardGraph::bindings(const Network& net, const Array& batch,
                                      const Array* labels) const {
  if (batch.rank() != 2 || batch.cols() != input_dim_) {
    fail(ErrorCode::Shape, "batch has shape " + diff::shape_string(batch.shape()) +
                               ", network expects " + std::to_string(input_dim_) +
                               " input columns");
  }
  diff::Bindings out;
  for (const auto& p : trainable_params(net)) out.emplace(p.name, *p.values);
  out.emplace("x", batch);
  if (options_.with_loss) {
    if (!labels) fail(ErrorCode::InvalidArgument, "loss graph needs labels");
    out.emplace("y", *labels);
  }
  return out;
}

const Array& ForwardGraph::run(const Network& net, const Array& batch, const Array* labels) {
  tape_.forward(bindings(net, batch, labels));
  return tape_.value(prediction);
}

Array forward_masked(const Network& net, const Array& batch) {
  ForwardGraph graph(net, GraphOptions{.with_loss = false});
  return graph.run(net, batch);
}

}  // namespace sparsym::net
