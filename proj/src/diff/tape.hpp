#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "diff/array.hpp"
#include "diff/primitive.hpp"

namespace sparsym::diff {

/// Reference to a node recorded on a Tape.
struct Var {
  std::uint32_t index = std::numeric_limits<std::uint32_t>::max();
  bool valid() const { return index != std::numeric_limits<std::uint32_t>::max(); }
};

/// Marks a dimension of a declared input shape as free (e.g. the batch size).
inline constexpr std::size_t kAnyDim = std::numeric_limits<std::size_t>::max();

using Bindings = std::unordered_map<std::string, Array>;
using Gradients = std::map<std::string, Array>;

enum class BackwardMode {
  // Registered backward rules, surrogates included. Used for training.
  Surrogate,
  // Surrogate primitives propagate zero; what central differences measure.
  SmoothOnly,
};

/// Reverse-mode tape. Nodes are recorded in construction order, which is a
/// topological order by construction. `forward` evaluates every node against a
/// set of bindings for the free variables; `backward` sweeps the nodes once in
/// reverse. The structure can be re-run with new bindings (one batch per run).
class Tape {
 public:
  explicit Tape(const Registry& registry = Registry::standard()) : registry_(&registry) {}

  // Leaves.
  Var input(const std::string& name, Shape declared_shape, bool differentiable = true);
  Var constant(Array value);

  // Elementwise primitives, same-shape operands.
  Var apply(std::string_view primitive, Var x);
  Var apply(std::string_view primitive, Var x, Var y);
  Var apply(const PrimitiveHandle& primitive, Var x);
  Var apply(const PrimitiveHandle& primitive, Var x, Var y);

  // Column-heterogeneous activations on an [N x k] matrix: column j gets
  // prims[j]. `apply_pairs` consumes columns (2j, 2j+1) for binary prims[j].
  Var apply_columns(Var x, const std::vector<PrimitiveHandle>& prims);
  Var apply_pairs(Var x, const std::vector<PrimitiveHandle>& prims);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var affine(Var x, double scale, double shift);  // scale * x + shift
  Var matmul(Var a, Var b);                       // [N x K] * [K x M]
  Var add_row(Var a, Var row);                    // [N x M] + [M]
  Var mul_row(Var a, Var row);                    // [N x M] * [M], per column
  Var slice_cols(Var a, std::size_t begin, std::size_t end);
  Var concat_cols(Var a, Var b);
  Var sum(Var a);   // scalar
  Var mean(Var a);  // scalar

  void forward(const Bindings& bindings);
  bool has_forward() const { return forwarded_; }

  const Array& value(Var v) const;

  /// Gradient of sum_k <seeds[k], outputs[k]> with respect to every
  /// differentiable input, keyed by input name.
  Gradients backward(std::span<const Var> outputs, std::span<const Array> seeds,
                     BackwardMode mode = BackwardMode::Surrogate) const;
  Gradients backward(Var output, const Array& seed,
                     BackwardMode mode = BackwardMode::Surrogate) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t surrogate_count() const;
  std::vector<std::string> input_names(bool differentiable_only = false) const;
  const Registry& registry() const { return *registry_; }

 private:
  enum class Op {
    Input,
    Constant,
    Apply1,
    Apply2,
    ApplyColumns,
    ApplyPairs,
    Add,
    Sub,
    Mul,
    Affine,
    MatMul,
    AddRow,
    MulRow,
    SliceCols,
    ConcatCols,
    Sum,
    Mean,
  };

  struct Node {
    Op op;
    std::vector<std::uint32_t> args;
    std::vector<PrimitiveHandle> prims;
    std::string name;
    Shape declared;
    bool differentiable = false;
    double scale = 1.0;
    double shift = 0.0;
    std::size_t begin = 0;
    std::size_t end = 0;
    Array value;
  };

  Var push(Node node);
  const Node& node(Var v) const;
  void evaluate(Node& n);
  void check_var(Var v) const;

  const Registry* registry_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::uint32_t> inputs_;
  bool forwarded_ = false;
};

}  // namespace sparsym::diff
