#pragma once

#include <json.hpp>

#include "expr/expr.hpp"

namespace sparsym::expr {

/// {"kind":"constant","value":v} | {"kind":"variable","index":i} |
/// {"kind":"unary","op":name,"child":...} |
/// {"kind":"binary","op":name,"left":...,"right":...}
nlohmann::json to_json(const Expr& e);
/// Throws ErrorCode::Parse on malformed nodes.
Expr from_json(const nlohmann::json& j);

}  // namespace sparsym::expr
