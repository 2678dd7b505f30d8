#include "train/adam.hpp"

#include <cmath>

#include "common/error.hpp"

namespace sparsym::train {

void adam_step(std::span<const net::ParamRef> params, const diff::Gradients& grads,
               AdamState& state, const AdamConfig& config) {
  for (const auto& p : params) {
    auto it = grads.find(p.name);
    if (it == grads.end()) fail(ErrorCode::Runtime, "no gradient for parameter '" + p.name + "'");
    if (it->second.shape() != p.values->shape()) {
      fail(ErrorCode::Shape, "gradient shape mismatch for parameter '" + p.name + "'");
    }
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      if (!std::isfinite(it->second[i])) {
        fail(ErrorCode::Numeric, "non-finite gradient in parameter '" + p.name + "[" +
                                     std::to_string(i) + "]'");
      }
    }
  }

  ++state.t;
  const double b1 = config.beta1, b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (const auto& p : params) {
    const diff::Array& g = grads.at(p.name);
    diff::Array& w = *p.values;
    auto [mi, m_new] = state.m.try_emplace(p.name, w.shape(), 0.0);
    auto [vi, v_new] = state.v.try_emplace(p.name, w.shape(), 0.0);
    diff::Array& m = mi->second;
    diff::Array& v = vi->second;
    const bool maskable = p.role == net::ParamRole::Weight && p.owner != nullptr;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (maskable && p.owner->is_frozen(i)) continue;
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

void reset_moments(AdamState& state, const std::string& name, const std::vector<std::uint8_t>& mask) {
  for (auto* table : {&state.m, &state.v}) {
    auto it = table->find(name);
    if (it == table->end()) continue;
    for (std::size_t i = 0; i < mask.size() && i < it->second.size(); ++i) {
      if (mask[i]) it->second[i] = 0.0;
    }
  }
}

}  // namespace sparsym::train
