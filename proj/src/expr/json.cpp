#include "expr/json.hpp"

#include <cmath>

#include "common/error.hpp"

namespace sparsym::expr {

nlohmann::json to_json(const Expr& e) {
  switch (e->kind) {
    case Kind::Constant: return {{"kind", "constant"}, {"value", e->value}};
    case Kind::Variable: return {{"kind", "variable"}, {"index", e->index}};
    case Kind::Unary: return {{"kind", "unary"}, {"op", e->op}, {"child", to_json(e->left)}};
    case Kind::Binary:
      return {{"kind", "binary"},
              {"op", e->op},
              {"left", to_json(e->left)},
              {"right", to_json(e->right)}};
  }
  return nullptr;
}

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::Parse, std::string("expression node lacks \"") + key + "\"");
  return *it;
}

std::string op_name(const nlohmann::json& j) {
  const auto& op = field(j, "op");
  if (!op.is_string()) fail(ErrorCode::Parse, "expression \"op\" must be a string");
  return op.get<std::string>();
}

}  // namespace

Expr from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::Parse, "expression node must be an object");
  const auto& kind = field(j, "kind");
  if (!kind.is_string()) fail(ErrorCode::Parse, "expression \"kind\" must be a string");
  const auto k = kind.get<std::string>();
  if (k == "constant") {
    const auto& v = field(j, "value");
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(ErrorCode::Parse, "constant \"value\" must be a finite number");
    }
    return constant(v.get<double>());
  }
  if (k == "variable") {
    const auto& i = field(j, "index");
    if (!i.is_number_unsigned()) fail(ErrorCode::Parse, "variable \"index\" must be a nonnegative integer");
    return variable(i.get<std::size_t>());
  }
  const auto& registry = diff::Registry::standard();
  if (k == "unary") {
    auto op = op_name(j);
    auto p = registry.find(op);
    if (!p || p->arity != 1) fail(ErrorCode::Parse, "unknown unary operator '" + op + "'");
    return unary(std::move(op), from_json(field(j, "child")));
  }
  if (k == "binary") {
    auto op = op_name(j);
    if (!is_expression_only_binary(op)) {
      auto p = registry.find(op);
      if (!p || p->arity != 2) fail(ErrorCode::Parse, "unknown binary operator '" + op + "'");
    }
    return binary(std::move(op), from_json(field(j, "left")), from_json(field(j, "right")));
  }
  fail(ErrorCode::Parse, "unknown expression kind '" + k + "'");
}

}  // namespace sparsym::expr
