#pragma once

#include "expr/expr.hpp"

namespace sparsym::expr {

/// Rewrites to a fixpoint: constant folding, removal of id nodes, additive
/// zero terms, unit factors and subtrees multiplied by zero, flattening of
/// add/mul chains with their constants merged into one (trailing for sums,
/// leading for products). No distribution and no trigonometric identities.
Expr simplify(const Expr& e, const diff::Registry& registry = diff::Registry::standard());

}  // namespace sparsym::expr
