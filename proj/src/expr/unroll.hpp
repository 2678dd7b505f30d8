#pragma once

#include <optional>
#include <vector>

#include "data/dataset.hpp"
#include "expr/expr.hpp"
#include "net/network.hpp"

namespace sparsym::expr {

/// One expression per network output, composed from the masked network at
/// its current thresholds: pruned weights dropped, closed inputs replaced by
/// 0, closed unary gates by the identity, closed binary gates by addition.
/// Not simplified. With `standardization`, variables refer to raw features
/// and the affine map (x - mean) / stddev is folded in.
std::vector<Expr> unroll(const net::Network& net,
                         const std::optional<data::Standardization>& standardization = std::nullopt);

/// unroll followed by simplify on every output.
std::vector<Expr> unroll_simplified(
    const net::Network& net,
    const std::optional<data::Standardization>& standardization = std::nullopt);

}  // namespace sparsym::expr
