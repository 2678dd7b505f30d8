#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "diff/primitive.hpp"

namespace sparsym::expr {

enum class Kind { Constant, Variable, Unary, Binary };

struct Node;
using Expr = std::shared_ptr<const Node>;

// Immutable tree node. Subtrees may be shared between trees.
struct Node {
  Kind kind = Kind::Constant;
  double value = 0.0;      // Constant
  std::size_t index = 0;   // Variable
  std::string op;          // Unary / Binary
  Expr left, right;        // Unary uses left only
};

Expr constant(double value);
Expr variable(std::size_t index);
Expr unary(std::string op, Expr child);
Expr binary(std::string op, Expr left, Expr right);

inline Expr add(Expr a, Expr b) { return binary("add", std::move(a), std::move(b)); }
inline Expr mul(Expr a, Expr b) { return binary("mul", std::move(a), std::move(b)); }
inline Expr pow(Expr a, Expr b) { return binary("pow", std::move(a), std::move(b)); }

bool is_constant(const Expr& e);
bool is_constant(const Expr& e, double value);
bool is_op(const Expr& e, std::string_view op);

// Binary operators known outside the primitive registry. "pow" exists only at
// the expression level; it is what unrolling writes for squares.
bool is_expression_only_binary(std::string_view op);

/// Recursive evaluation. Throws ErrorCode::Numeric on a non-finite result and
/// InvalidArgument on an out-of-range variable or unknown operator.
double eval(const Expr& e, std::span<const double> x,
            const diff::Registry& registry = diff::Registry::standard());

/// Node count in preorder, every node weighted 1, where a maximal chain of
/// the associative operators add or mul counts as a single n-ary node (the
/// flattened canonical form).
std::size_t complexity(const Expr& e);

/// Binary-tree node count, without chain flattening.
std::size_t node_count(const Expr& e);

/// Throws when a variable index is >= n_input or an operator does not
/// resolve with the right arity.
void validate(const Expr& e, std::size_t n_input,
              const diff::Registry& registry = diff::Registry::standard());

/// Largest variable index + 1 (0 for variable-free trees).
std::size_t variable_bound(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

/// Operands of the maximal chain of `op` rooted at e, left to right.
void collect_chain(const Expr& e, std::string_view op, std::vector<Expr>& out);
/// Left-deep rebuild of a chain; a single operand is returned as is.
Expr build_chain(std::string_view op, const std::vector<Expr>& operands);

}  // namespace sparsym::expr
