#include "net/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "common/error.hpp"

namespace sparsym::net {

void NetworkSpec::validate(const diff::Registry& registry) const {
  if (input_dim == 0) fail(ErrorCode::Config, "input_dim must be positive");
  if (output_dim == 0) fail(ErrorCode::Config, "output_dim must be positive");
  if (layers.empty()) fail(ErrorCode::Config, "network needs at least one symbolic layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& ops = layers[l];
    if (ops.u() + ops.b() == 0) {
      fail(ErrorCode::Config, "layer " + std::to_string(l) + " has no operators");
    }
    for (const auto& name : ops.unary) {
      auto p = registry.find(name);
      if (!p || p->arity != 1 || p->surrogate) {
        fail(ErrorCode::Config, "layer " + std::to_string(l) + ": '" + name +
                                    "' is not a registered unary operator");
      }
    }
    for (const auto& name : ops.binary) {
      auto p = registry.find(name);
      if (!p || p->arity != 2 || p->surrogate) {
        fail(ErrorCode::Config, "layer " + std::to_string(l) + ": '" + name +
                                    "' is not a registered binary operator");
      }
    }
  }
  auto check_alpha = [](double a, const char* what) {
    if (!(a >= 0.0 && a <= 1.0)) {
      fail(ErrorCode::Config, std::string(what) + " must lie in [0, 1]");
    }
  };
  check_alpha(targets.weight, "alpha_weight");
  check_alpha(targets.input, "alpha_input");
  check_alpha(targets.unary, "alpha_unary");
  check_alpha(targets.binary, "alpha_binary");
  if (!(decay_rate > 0.0) || !std::isfinite(decay_rate)) {
    fail(ErrorCode::Config, "decay_rate must be positive");
  }
}

bool operator==(const PrunableTensor& a, const PrunableTensor& b) {
  return a.weights == b.weights && a.thresholds == b.thresholds && a.bounds == b.bounds &&
         a.trainable_weights == b.trainable_weights && a.frozen == b.frozen;
}

bool operator==(const Network& a, const Network& b) {
  if (!(a.spec == b.spec) || a.gating != b.gating || !(a.input_gate == b.input_gate)) {
    return false;
  }
  if (a.linear.size() != b.linear.size()) return false;
  for (std::size_t i = 0; i < a.linear.size(); ++i) {
    if (!(a.linear[i].weight == b.linear[i].weight) || !(a.linear[i].bias == b.linear[i].bias)) {
      return false;
    }
  }
  return a.unary_gates == b.unary_gates && a.binary_gates == b.binary_gates;
}

std::size_t Network::n_weight() const {
  std::size_t n = 0;
  for (const auto& layer : linear) n += layer.weight.weights.size() + layer.bias.weights.size();
  return n;
}

std::size_t Network::n_unary() const {
  std::size_t n = 0;
  for (const auto& g : unary_gates) n += g.weights.size();
  return n;
}

std::size_t Network::n_binary() const {
  std::size_t n = 0;
  for (const auto& g : binary_gates) n += g.weights.size();
  return n;
}

namespace {

PrunableTensor make_gate(std::size_t count, Gating gating) {
  PrunableTensor gate;
  gate.weights = Array(diff::Shape{count}, 1.0);
  if (gating == Gating::Pruned) gate.thresholds = Array(diff::Shape{count}, 0.0);
  else gate.thresholds = Array(diff::Shape{0});
  gate.bounds = ThresholdBounds::Unit;
  gate.trainable_weights = false;
  return gate;
}

PrunableTensor make_weights(diff::Shape shape, double stddev, std::mt19937_64& rng,
                            Gating gating) {
  PrunableTensor t;
  t.weights = Array(shape);
  std::normal_distribution<double> normal(0.0, stddev);
  for (auto& w : t.weights.values()) w = normal(rng);
  t.thresholds = gating == Gating::Pruned ? Array(shape, 0.0) : Array(diff::Shape{0});
  t.bounds = ThresholdBounds::NonNegative;
  t.trainable_weights = true;
  return t;
}

}  // namespace

Network build(const NetworkSpec& spec, Gating gating) {
  spec.validate();
  Network net;
  net.spec = spec;
  net.gating = gating;
  std::mt19937_64 rng(spec.seed);

  if (gating == Gating::Pruned) {
    net.input_gate = make_gate(spec.input_dim, gating);
  } else {
    net.input_gate = make_gate(0, gating);
  }

  std::size_t width = spec.input_dim;
  for (const auto& ops : spec.layers) {
    const double stddev = 1.0 / std::sqrt(static_cast<double>(width));
    LinearLayer layer;
    layer.weight = make_weights({width, ops.in_width()}, stddev, rng, gating);
    layer.bias = make_weights({ops.in_width()}, stddev, rng, gating);
    net.linear.push_back(std::move(layer));
    net.unary_gates.push_back(make_gate(gating == Gating::Pruned ? ops.u() : 0, gating));
    net.binary_gates.push_back(make_gate(gating == Gating::Pruned ? ops.b() : 0, gating));
    width = ops.out_width();
  }
  const double stddev = 1.0 / std::sqrt(static_cast<double>(width));
  LinearLayer out;
  out.weight = make_weights({width, spec.output_dim}, stddev, rng, gating);
  out.bias = make_weights({spec.output_dim}, stddev, rng, gating);
  net.linear.push_back(std::move(out));
  return net;
}

bool weight_pruned(const PrunableTensor& tensor, std::size_t i) {
  if (tensor.is_frozen(i)) return true;
  if (!tensor.has_thresholds()) return tensor.weights[i] == 0.0;
  return !(std::abs(tensor.weights[i]) - tensor.thresholds[i] > 0.0);
}

bool gate_closed(const PrunableTensor& gate, std::size_t i) {
  if (!gate.has_thresholds()) return false;
  return !(gate.weights[i] - gate.thresholds[i] > 0.0);
}

namespace {

double ratio(const CategoryCount& c) {
  return c.total == 0 ? 1.0 : static_cast<double>(c.pruned) / static_cast<double>(c.total);
}

void count_weights(const PrunableTensor& t, CategoryCount& c) {
  for (std::size_t i = 0; i < t.weights.size(); ++i) {
    ++c.total;
    c.pruned += weight_pruned(t, i);
  }
}

void count_gates(const PrunableTensor& g, CategoryCount& c) {
  if (!g.has_thresholds()) return;
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    ++c.total;
    c.pruned += gate_closed(g, i);
  }
}

void clip(PrunableTensor& t) {
  if (!t.has_thresholds()) return;
  for (auto& v : t.thresholds.values()) {
    v = std::max(v, 0.0);
    if (t.bounds == ThresholdBounds::Unit) v = std::min(v, 1.0);
  }
}

}  // namespace

SparsityReport sparsity(const Network& net) {
  SparsityReport r;
  for (const auto& layer : net.linear) {
    count_weights(layer.weight, r.weight);
    count_weights(layer.bias, r.weight);
  }
  count_gates(net.input_gate, r.input);
  for (const auto& g : net.unary_gates) count_gates(g, r.unary);
  for (const auto& g : net.binary_gates) count_gates(g, r.binary);
  r.s_weight = ratio(r.weight);
  r.s_input = ratio(r.input);
  r.s_unary = ratio(r.unary);
  r.s_binary = ratio(r.binary);
  return r;
}

void clip_thresholds(Network& net) {
  clip(net.input_gate);
  for (auto& layer : net.linear) {
    clip(layer.weight);
    clip(layer.bias);
  }
  for (auto& g : net.unary_gates) clip(g);
  for (auto& g : net.binary_gates) clip(g);
}

namespace {

template <typename NetT, typename Fn>
void visit_params(NetT& net, Fn&& fn) {
  const bool pruned = net.gating == Gating::Pruned;
  if (pruned) fn("in.t", net.input_gate.thresholds, ParamRole::InputThreshold, net.input_gate);
  for (std::size_t k = 0; k < net.linear.size(); ++k) {
    const std::string p = "L" + std::to_string(k) + ".";
    auto& layer = net.linear[k];
    fn(p + "w", layer.weight.weights, ParamRole::Weight, layer.weight);
    fn(p + "b", layer.bias.weights, ParamRole::Weight, layer.bias);
    if (pruned) {
      fn(p + "tw", layer.weight.thresholds, ParamRole::WeightThreshold, layer.weight);
      fn(p + "tb", layer.bias.thresholds, ParamRole::WeightThreshold, layer.bias);
    }
    if (pruned && k < net.unary_gates.size()) {
      fn(p + "tu", net.unary_gates[k].thresholds, ParamRole::UnaryThreshold,
         net.unary_gates[k]);
      fn(p + "tbin", net.binary_gates[k].thresholds, ParamRole::BinaryThreshold,
         net.binary_gates[k]);
    }
  }
}

}  // namespace

std::vector<ParamRef> trainable_params(Network& net) {
  std::vector<ParamRef> out;
  visit_params(net, [&](std::string name, Array& a, ParamRole role, PrunableTensor& owner) {
    out.push_back({std::move(name), &a, role, &owner});
  });
  return out;
}

std::vector<ParamView> trainable_params(const Network& net) {
  std::vector<ParamView> out;
  visit_params(net, [&](std::string name, const Array& a, ParamRole role,
                        const PrunableTensor&) { out.push_back({std::move(name), &a, role}); });
  return out;
}

MeanThresholds mean_thresholds(const Network& net) {
  double sums[4] = {0, 0, 0, 0};
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& p : trainable_params(net)) {
    int slot = -1;
    switch (p.role) {
      case ParamRole::Weight: break;
      case ParamRole::WeightThreshold: slot = 0; break;
      case ParamRole::InputThreshold: slot = 1; break;
      case ParamRole::UnaryThreshold: slot = 2; break;
      case ParamRole::BinaryThreshold: slot = 3; break;
    }
    if (slot < 0) continue;
    for (double v : p.values->values()) sums[slot] += v;
    counts[slot] += p.values->size();
  }
  auto mean = [&](int k) { return counts[k] ? sums[k] / static_cast<double>(counts[k]) : 0.0; };
  return {mean(0), mean(1), mean(2), mean(3)};
}

}  // namespace sparsym::net
