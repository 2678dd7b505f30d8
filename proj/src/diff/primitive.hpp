#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sparsym::diff {

using UnaryFn = std::function<double(double)>;
using BinaryFn = std::function<double(double, double)>;
using BinaryGradFn = std::function<std::array<double, 2>(double, double)>;

/// Scalar elementwise operation with its backward rule. A surrogate primitive
/// deliberately returns something other than the true derivative from
/// `backward` (the step mask), and is excluded from finite-difference checks.
struct Primitive {
  std::string name;
  int arity = 1;
  UnaryFn forward1;
  UnaryFn backward1;
  BinaryFn forward2;
  BinaryGradFn backward2;
  bool surrogate = false;

  double apply(double x) const { return forward1(x); }
  double apply(double x, double y) const { return forward2(x, y); }
};

using PrimitiveHandle = std::shared_ptr<const Primitive>;

/// Sharpness of the sigmoid used as the surrogate derivative of the step mask.
inline constexpr double kStepSurrogateSharpness = 5.0;

double step(double x);
double step_surrogate_derivative(double x, double kappa = kStepSurrogateSharpness);

class Registry {
 public:
  Registry() = default;

  /// Shared immutable registry with the shipped operator set: unary sin, cos,
  /// tanh, exp, gauss (exp(-x^2)), sinh, cosh, square, id, abs, step
  /// (surrogate); binary add, mul.
  static const Registry& standard();

  PrimitiveHandle register_primitive(Primitive primitive);
  PrimitiveHandle register_unary(std::string name, UnaryFn forward, UnaryFn backward,
                                 bool surrogate = false);
  PrimitiveHandle register_binary(std::string name, BinaryFn forward,
                                  BinaryGradFn backward, bool surrogate = false);

  bool contains(std::string_view name) const;
  /// Throws ErrorCode::InvalidArgument for unknown names.
  PrimitiveHandle get(std::string_view name) const;
  PrimitiveHandle find(std::string_view name) const;

  std::vector<std::string> names() const;
  std::vector<std::string> names(int arity) const;

 private:
  std::map<std::string, PrimitiveHandle, std::less<>> primitives_;
};

}  // namespace sparsym::diff
