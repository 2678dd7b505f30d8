#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "diff/array.hpp"
#include "diff/primitive.hpp"

namespace sparsym::net {

using diff::Array;

/// Activations of one symbolic layer: u unary then b binary operators.
struct OperatorSet {
  std::vector<std::string> unary;
  std::vector<std::string> binary;

  std::size_t u() const { return unary.size(); }
  std::size_t b() const { return binary.size(); }
  std::size_t in_width() const { return unary.size() + 2 * binary.size(); }
  std::size_t out_width() const { return unary.size() + binary.size(); }

  friend bool operator==(const OperatorSet&, const OperatorSet&) = default;
};

struct SparsityTargets {
  double weight = 0.0;
  double input = 0.0;
  double unary = 0.0;
  double binary = 0.0;

  friend bool operator==(const SparsityTargets&, const SparsityTargets&) = default;
};

struct NetworkSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 1;
  std::vector<OperatorSet> layers;
  SparsityTargets targets;
  double decay_rate = 0.01;
  std::uint64_t seed = 0;

  /// Throws ErrorCode::Config on an invalid spec.
  void validate(const diff::Registry& registry = diff::Registry::standard()) const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

enum class ThresholdBounds { NonNegative, Unit };

/// A weight array paired entry-for-entry with a trainable threshold array.
/// Auxiliary gates (inputs, operators) use untrainable unit weights. `frozen`
/// is empty unless hard pruning pinned entries at exactly zero.
struct PrunableTensor {
  Array weights;
  Array thresholds;
  ThresholdBounds bounds = ThresholdBounds::NonNegative;
  bool trainable_weights = true;
  std::vector<std::uint8_t> frozen;

  bool has_thresholds() const {
    return weights.size() > 0 && thresholds.size() == weights.size() && thresholds.rank() == weights.rank();
  }
  bool is_frozen(std::size_t i) const { return !frozen.empty() && frozen[i] != 0; }
};

struct LinearLayer {
  PrunableTensor weight;  // [in x out]
  PrunableTensor bias;    // [out]
};

/// Pruned: every weight, input and operator carries a trainable threshold.
/// Plain: no thresholds at all (the three-stage baseline).
enum class Gating { Pruned, Plain };

struct Network {
  NetworkSpec spec;
  Gating gating = Gating::Pruned;
  PrunableTensor input_gate;            // [input_dim], Pruned only
  std::vector<LinearLayer> linear;      // layers.size() + 1, last is the output layer
  std::vector<PrunableTensor> unary_gates;   // per layer, [u]
  std::vector<PrunableTensor> binary_gates;  // per layer, [b]

  std::size_t n_weight() const;
  std::size_t n_input() const { return spec.input_dim; }
  std::size_t n_unary() const;
  std::size_t n_binary() const;

  friend bool operator==(const Network&, const Network&);
};

bool operator==(const PrunableTensor& a, const PrunableTensor& b);

/// Weights and biases ~ Normal(0, 1/sqrt(fan_in)) from `spec.seed`; every
/// threshold 0; every auxiliary gate weight 1.
Network build(const NetworkSpec& spec, Gating gating = Gating::Pruned);

struct CategoryCount {
  std::size_t pruned = 0;
  std::size_t total = 0;
};

struct SparsityReport {
  double s_weight = 0.0;
  double s_input = 0.0;
  double s_unary = 0.0;
  double s_binary = 0.0;
  CategoryCount weight, input, unary, binary;
};

// theta(|w| - t) == 0, i.e. |w| <= t. For Plain networks a weight is pruned
// when it is frozen or exactly zero.
bool weight_pruned(const PrunableTensor& tensor, std::size_t i);
// theta(1 - t) == 0, i.e. t >= 1. Absent gates (Plain networks) are open.
bool gate_closed(const PrunableTensor& gate, std::size_t i);

/// Pruned fraction per category. Categories with no members report 1.
SparsityReport sparsity(const Network& net);

/// Projects every threshold into its bounds: [0, inf) for weights, [0, 1] for
/// input and operator gates.
void clip_thresholds(Network& net);

enum class ParamRole { Weight, WeightThreshold, InputThreshold, UnaryThreshold, BinaryThreshold };

struct ParamRef {
  std::string name;
  Array* values;
  ParamRole role;
  const PrunableTensor* owner;
};

/// Every trainable array of the network, with stable names used as tape
/// input names, checkpoint keys and optimizer-state keys.
std::vector<ParamRef> trainable_params(Network& net);

struct ParamView {
  std::string name;
  const Array* values;
  ParamRole role;
};
std::vector<ParamView> trainable_params(const Network& net);

struct MeanThresholds {
  double weight = 0.0;
  double input = 0.0;
  double unary = 0.0;
  double binary = 0.0;
};
MeanThresholds mean_thresholds(const Network& net);

}  // namespace sparsym::net
