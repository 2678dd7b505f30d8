#pragma once

#include <array>

#include "diff/array.hpp"
#include "net/network.hpp"

namespace sparsym::loss {

using diff::Array;

struct LossBreakdown {
  double l_error = 0.0;
  double l_sparse_weight = 0.0;
  double l_sparse_input = 0.0;
  double l_sparse_unary = 0.0;
  double l_sparse_binary = 0.0;
  double total = 0.0;
};

// Current value of each category's threshold regularizer.
struct RegValues {
  double weight = 0.0;
  double input = 0.0;
  double unary = 0.0;
  double binary = 0.0;
};

/// exp(-(alpha / (alpha - min(s, alpha)))^d + 1), and exactly 0 once
/// s >= alpha or when alpha == 0.
double decay_factor(double s, double alpha, double d);

/// (1/n) sum exp(-T_i); 0 when n == 0.
double weight_threshold_reg(const Array& thresholds, std::size_t n);
/// exp(-(1/n) sum T_i); 0 when n == 0.
double aux_threshold_reg(const Array& thresholds, std::size_t n);

double mse(const Array& predictions, const Array& labels);

// Decay factors in category order weight, input, unary, binary.
std::array<double, 4> decay_factors(const net::SparsityReport& report,
                                    const net::SparsityTargets& targets, double d);

/// Each sparse term is l_error * D(s_cat) * reg_cat. The coefficient
/// l_error * D is a constant for differentiation purposes; the trainer seeds
/// the regularizer outputs with it.
LossBreakdown total_loss(double l_error, const net::SparsityReport& report, const RegValues& regs,
                         const net::SparsityTargets& targets, double d);

/// Regularizer values computed straight from the network's thresholds.
RegValues threshold_regs(const net::Network& net);

}  // namespace sparsym::loss
