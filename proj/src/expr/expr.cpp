#include "expr/expr.hpp"

#include <cmath>

#include "common/error.hpp"

namespace sparsym::expr {

Expr constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->value = value;
  return n;
}

Expr variable(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->index = index;
  return n;
}

Expr unary(std::string op, Expr child) {
  if (!child) fail(ErrorCode::InvalidArgument, "unary node needs a child");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Unary;
  n->op = std::move(op);
  n->left = std::move(child);
  return n;
}

Expr binary(std::string op, Expr left, Expr right) {
  if (!left || !right) fail(ErrorCode::InvalidArgument, "binary node needs two children");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->op = std::move(op);
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}

bool is_constant(const Expr& e) { return e->kind == Kind::Constant; }
bool is_constant(const Expr& e, double value) {
  return e->kind == Kind::Constant && e->value == value;
}
bool is_op(const Expr& e, std::string_view op) {
  return (e->kind == Kind::Unary || e->kind == Kind::Binary) && e->op == op;
}

bool is_expression_only_binary(std::string_view op) { return op == "pow"; }

namespace {

double eval_node(const Node& n, std::span<const double> x, const diff::Registry& registry) {
  switch (n.kind) {
    case Kind::Constant: return n.value;
    case Kind::Variable:
      if (n.index >= x.size()) {
        fail(ErrorCode::InvalidArgument, "variable x" + std::to_string(n.index) +
                                             " outside input of width " + std::to_string(x.size()));
      }
      return x[n.index];
    case Kind::Unary: {
      const double a = eval_node(*n.left, x, registry);
      return registry.get(n.op)->forward1(a);
    }
    case Kind::Binary: {
      const double a = eval_node(*n.left, x, registry);
      const double b = eval_node(*n.right, x, registry);
      if (n.op == "add") return a + b;
      if (n.op == "mul") return a * b;
      if (n.op == "pow") return std::pow(a, b);
      return registry.get(n.op)->forward2(a, b);
    }
  }
  return 0.0;
}

}  // namespace

double eval(const Expr& e, std::span<const double> x, const diff::Registry& registry) {
  const double v = eval_node(*e, x, registry);
  if (!std::isfinite(v)) fail(ErrorCode::Numeric, "expression evaluated to a non-finite value");
  return v;
}

void collect_chain(const Expr& e, std::string_view op, std::vector<Expr>& out) {
  if (e->kind == Kind::Binary && e->op == op) {
    collect_chain(e->left, op, out);
    collect_chain(e->right, op, out);
  } else {
    out.push_back(e);
  }
}

Expr build_chain(std::string_view op, const std::vector<Expr>& operands) {
  if (operands.empty()) fail(ErrorCode::InvalidArgument, "empty operator chain");
  Expr acc = operands.front();
  for (std::size_t i = 1; i < operands.size(); ++i) acc = binary(std::string(op), acc, operands[i]);
  return acc;
}

std::size_t complexity(const Expr& e) {
  switch (e->kind) {
    case Kind::Constant:
    case Kind::Variable: return 1;
    case Kind::Unary: return 1 + complexity(e->left);
    case Kind::Binary: {
      if (e->op == "add" || e->op == "mul") {
        std::vector<Expr> operands;
        collect_chain(e, e->op, operands);
        std::size_t n = 1;
        for (const auto& o : operands) n += complexity(o);
        return n;
      }
      return 1 + complexity(e->left) + complexity(e->right);
    }
  }
  return 0;
}

std::size_t node_count(const Expr& e) {
  switch (e->kind) {
    case Kind::Constant:
    case Kind::Variable: return 1;
    case Kind::Unary: return 1 + node_count(e->left);
    case Kind::Binary: return 1 + node_count(e->left) + node_count(e->right);
  }
  return 0;
}

void validate(const Expr& e, std::size_t n_input, const diff::Registry& registry) {
  switch (e->kind) {
    case Kind::Constant:
      if (!std::isfinite(e->value)) fail(ErrorCode::InvalidArgument, "non-finite constant");
      return;
    case Kind::Variable:
      if (e->index >= n_input) {
        fail(ErrorCode::InvalidArgument, "variable x" + std::to_string(e->index) +
                                             " outside " + std::to_string(n_input) + " inputs");
      }
      return;
    case Kind::Unary: {
      auto p = registry.find(e->op);
      if (!p || p->arity != 1) fail(ErrorCode::InvalidArgument, "unknown unary operator '" + e->op + "'");
      validate(e->left, n_input, registry);
      return;
    }
    case Kind::Binary: {
      if (!is_expression_only_binary(e->op)) {
        auto p = registry.find(e->op);
        if (!p || p->arity != 2) {
          fail(ErrorCode::InvalidArgument, "unknown binary operator '" + e->op + "'");
        }
      }
      validate(e->left, n_input, registry);
      validate(e->right, n_input, registry);
      return;
    }
  }
}

std::size_t variable_bound(const Expr& e) {
  switch (e->kind) {
    case Kind::Constant: return 0;
    case Kind::Variable: return e->index + 1;
    case Kind::Unary: return variable_bound(e->left);
    case Kind::Binary: return std::max(variable_bound(e->left), variable_bound(e->right));
  }
  return 0;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Kind::Constant:
      return a->value == b->value || (std::isnan(a->value) && std::isnan(b->value));
    case Kind::Variable: return a->index == b->index;
    case Kind::Unary: return a->op == b->op && structurally_equal(a->left, b->left);
    case Kind::Binary:
      return a->op == b->op && structurally_equal(a->left, b->left) &&
             structurally_equal(a->right, b->right);
  }
  return false;
}

}  // namespace sparsym::expr
