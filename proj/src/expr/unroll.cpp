#include "expr/unroll.hpp"

#include "common/error.hpp"
#include "expr/simplify.hpp"

namespace sparsym::expr {

namespace {

Expr apply_unary(const std::string& op, const Expr& z) {
  if (op == "id") return z;
  if (op == "square") return pow(z, constant(2.0));
  if (op == "gauss") return unary("exp", mul(constant(-1.0), pow(z, constant(2.0))));
  return unary(op, z);
}

// Pre-activations of one masked affine layer. Terms are summed in input order
// and the bias is added last, the same order the forward pass accumulates.
std::vector<Expr> affine(const net::LinearLayer& layer, const std::vector<Expr>& h) {
  const auto& W = layer.weight;
  const auto& b = layer.bias;
  const std::size_t in = W.weights.rows(), out = W.weights.cols();
  std::vector<Expr> z(out);
  for (std::size_t j = 0; j < out; ++j) {
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < in; ++i) {
      const std::size_t flat = i * out + j;
      if (net::weight_pruned(W, flat)) continue;
      terms.push_back(mul(constant(W.weights[flat]), h[i]));
    }
    if (!net::weight_pruned(b, j)) terms.push_back(constant(b.weights[j]));
    z[j] = terms.empty() ? constant(0.0) : build_chain("add", terms);
  }
  return z;
}

}  // namespace

std::vector<Expr> unroll(const net::Network& net,
                         const std::optional<data::Standardization>& standardization) {
  const std::size_t n_in = net.spec.input_dim;
  if (standardization &&
      (standardization->mean.size() != n_in || standardization->stddev.size() != n_in)) {
    fail(ErrorCode::Shape, "standardization statistics do not match the network input");
  }
  std::vector<Expr> h(n_in);
  for (std::size_t i = 0; i < n_in; ++i) {
    if (net.input_gate.has_thresholds() && net::gate_closed(net.input_gate, i)) {
      h[i] = constant(0.0);
    } else if (standardization) {
      const double sd = standardization->stddev[i];
      h[i] = sd > 0.0 ? mul(constant(1.0 / sd),
                            add(variable(i), constant(-standardization->mean[i])))
                      : constant(0.0);
    } else {
      h[i] = variable(i);
    }
  }

  for (std::size_t k = 0; k < net.spec.layers.size(); ++k) {
    const auto& ops = net.spec.layers[k];
    std::vector<Expr> z = affine(net.linear[k], h);
    const auto& ug = net.unary_gates[k];
    const auto& bg = net.binary_gates[k];
    std::vector<Expr> next;
    for (std::size_t j = 0; j < ops.u(); ++j) {
      const bool closed = ug.has_thresholds() && net::gate_closed(ug, j);
      next.push_back(closed ? z[j] : apply_unary(ops.unary[j], z[j]));
    }
    for (std::size_t j = 0; j < ops.b(); ++j) {
      const Expr& a = z[ops.u() + 2 * j];
      const Expr& c = z[ops.u() + 2 * j + 1];
      const bool closed = bg.has_thresholds() && net::gate_closed(bg, j);
      next.push_back(closed ? add(a, c) : binary(ops.binary[j], a, c));
    }
    h = std::move(next);
  }
  return affine(net.linear.back(), h);
}

std::vector<Expr> unroll_simplified(const net::Network& net,
                                    const std::optional<data::Standardization>& standardization) {
  auto exprs = unroll(net, standardization);
  for (auto& e : exprs) e = simplify(e);
  return exprs;
}

}  // namespace sparsym::expr
