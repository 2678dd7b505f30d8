#include "expr/simplify.hpp"

#include <cmath>
#include <vector>

namespace sparsym::expr {

namespace {

Expr pass(const Expr& e, const diff::Registry& registry);

Expr fold_chain(const Expr& e, const std::string& op, const diff::Registry& registry) {
  std::vector<Expr> raw;
  collect_chain(e, op, raw);
  std::vector<Expr> operands;
  for (const auto& r : raw) collect_chain(pass(r, registry), op, operands);

  const bool is_add = op == "add";
  double folded = is_add ? 0.0 : 1.0;
  bool any_constant = false;
  std::vector<Expr> rest;
  for (const auto& o : operands) {
    if (is_constant(o)) {
      folded = is_add ? folded + o->value : folded * o->value;
      any_constant = true;
    } else {
      rest.push_back(o);
    }
  }
  if (!std::isfinite(folded)) return build_chain(op, operands);
  if (!is_add && any_constant && folded == 0.0) return constant(0.0);
  if (rest.empty()) return constant(folded);

  std::vector<Expr> out;
  if (is_add) {
    out = rest;
    if (folded != 0.0) out.push_back(constant(folded));
  } else {
    if (folded != 1.0) out.push_back(constant(folded));
    out.insert(out.end(), rest.begin(), rest.end());
  }
  return build_chain(op, out);
}

Expr pass(const Expr& e, const diff::Registry& registry) {
  switch (e->kind) {
    case Kind::Constant:
    case Kind::Variable: return e;
    case Kind::Unary: {
      Expr c = pass(e->left, registry);
      if (e->op == "id") return c;
      if (is_constant(c)) {
        const double v = registry.get(e->op)->forward1(c->value);
        if (std::isfinite(v)) return constant(v);
      }
      return c == e->left ? e : unary(e->op, c);
    }
    case Kind::Binary: {
      if (e->op == "add" || e->op == "mul") return fold_chain(e, e->op, registry);
      Expr a = pass(e->left, registry);
      Expr b = pass(e->right, registry);
      if (e->op == "pow" && is_constant(b, 1.0)) return a;
      if (is_constant(a) && is_constant(b)) {
        const double v = e->op == "pow" ? std::pow(a->value, b->value)
                                        : registry.get(e->op)->forward2(a->value, b->value);
        if (std::isfinite(v)) return constant(v);
      }
      return (a == e->left && b == e->right) ? e : binary(e->op, a, b);
    }
  }
  return e;
}

}  // namespace

Expr simplify(const Expr& e, const diff::Registry& registry) {
  Expr current = e;
  // Each pass is idempotent on already-canonical subtrees; a handful of
  // rounds covers constants exposed by earlier folds.
  for (int round = 0; round < 64; ++round) {
    Expr next = pass(current, registry);
    if (structurally_equal(next, current)) return next;
    current = next;
  }
  return current;
}

}  // namespace sparsym::expr
