#include "loss/regloss.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace sparsym::loss {

double decay_factor(double s, double alpha, double d) {
  if (alpha <= 0.0 || s >= alpha) return 0.0;
  const double base = alpha / (alpha - std::max(s, 0.0));
  return std::exp(-std::pow(base, d) + 1.0);
}

double weight_threshold_reg(const Array& thresholds, std::size_t n) {
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (double t : thresholds.values()) sum += std::exp(-t);
  return sum / static_cast<double>(n);
}

double aux_threshold_reg(const Array& thresholds, std::size_t n) {
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (double t : thresholds.values()) sum += t;
  return std::exp(-sum / static_cast<double>(n));
}

double mse(const Array& predictions, const Array& labels) {
  if (predictions.shape() != labels.shape()) {
    fail(ErrorCode::Shape, "mse: predictions " + diff::shape_string(predictions.shape()) +
                               " vs labels " + diff::shape_string(labels.shape()));
  }
  if (predictions.size() == 0) fail(ErrorCode::InvalidArgument, "mse of an empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double r = predictions[i] - labels[i];
    sum += r * r;
  }
  return sum / static_cast<double>(predictions.size());
}

std::array<double, 4> decay_factors(const net::SparsityReport& report,
                                    const net::SparsityTargets& targets, double d) {
  return {decay_factor(report.s_weight, targets.weight, d),
          decay_factor(report.s_input, targets.input, d),
          decay_factor(report.s_unary, targets.unary, d),
          decay_factor(report.s_binary, targets.binary, d)};
}

LossBreakdown total_loss(double l_error, const net::SparsityReport& report, const RegValues& regs,
                         const net::SparsityTargets& targets, double d) {
  const auto D = decay_factors(report, targets, d);
  LossBreakdown out;
  out.l_error = l_error;
  out.l_sparse_weight = l_error * D[0] * regs.weight;
  out.l_sparse_input = l_error * D[1] * regs.input;
  out.l_sparse_unary = l_error * D[2] * regs.unary;
  out.l_sparse_binary = l_error * D[3] * regs.binary;
  out.total = l_error + out.l_sparse_weight + out.l_sparse_input + out.l_sparse_unary +
              out.l_sparse_binary;
  return out;
}

RegValues threshold_regs(const net::Network& net) {
  RegValues r;
  if (net.gating != net::Gating::Pruned) return r;
  double weight_sum = 0.0, input_sum = 0.0, unary_sum = 0.0, binary_sum = 0.0;
  for (const auto& p : net::trainable_params(net)) {
    const auto& t = *p.values;
    switch (p.role) {
      case net::ParamRole::Weight: break;
      case net::ParamRole::WeightThreshold:
        for (double v : t.values()) weight_sum += std::exp(-v);
        break;
      case net::ParamRole::InputThreshold:
        for (double v : t.values()) input_sum += v;
        break;
      case net::ParamRole::UnaryThreshold:
        for (double v : t.values()) unary_sum += v;
        break;
      case net::ParamRole::BinaryThreshold:
        for (double v : t.values()) binary_sum += v;
        break;
    }
  }
  auto aux = [](double sum, std::size_t n) {
    return n == 0 ? 0.0 : std::exp(-sum / static_cast<double>(n));
  };
  const std::size_t nw = net.n_weight();
  r.weight = nw == 0 ? 0.0 : weight_sum / static_cast<double>(nw);
  r.input = aux(input_sum, net.n_input());
  r.unary = aux(unary_sum, net.n_unary());
  r.binary = aux(binary_sum, net.n_binary());
  return r;
}

}  // namespace sparsym::loss
