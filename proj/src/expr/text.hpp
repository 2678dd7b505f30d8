#pragma once

#include <string>
#include <vector>

#include "common/error.hpp"
#include "expr/expr.hpp"

namespace sparsym::expr {

struct TextOptions {
  // Two significant figures instead of round-trip precision.
  bool display = false;
  // Variable names; x<k> is used when empty.
  std::vector<std::string> feature_names;
};

/// Infix rendering. In full mode parse_text(to_text(e)) rebuilds the same
/// tree, so evaluation agrees exactly.
std::string to_text(const Expr& e, const TextOptions& options = {});

enum class ParseErrorKind { Syntax, UnknownOperator, UnknownVariable };

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t position, const std::string& message);
  ParseErrorKind kind() const noexcept { return kind_; }
  // 0-based byte offset into the input.
  std::size_t position() const noexcept { return position_; }

 private:
  ParseErrorKind kind_;
  std::size_t position_;
};

/// Grammar, loosest first: sums (+, -), products (*, the middle dot, x-sign),
/// function application name(args), powers (^, right associative). A minus
/// directly before a number that is not raised to a power yields a negative
/// constant; subtracting a product negates its leading constant (or prepends
/// -1). Variables are x<k> or entries of `feature_names`.
Expr parse_text(const std::string& text, const std::vector<std::string>& feature_names = {},
                const diff::Registry& registry = diff::Registry::standard());

std::string format_constant(double v, bool display);

}  // namespace sparsym::expr
