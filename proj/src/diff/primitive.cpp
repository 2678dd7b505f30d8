#include "diff/primitive.hpp"

#include <cmath>

#include "common/error.hpp"

namespace sparsym::diff {

double step(double x) { return x > 0.0 ? 1.0 : 0.0; }

double step_surrogate_derivative(double x, double kappa) {
  // kappa e^{-kappa x} / (1 + e^{-kappa x})^2 is even in x; evaluate on the
  // decaying side so the exponential never overflows.
  const double e = std::exp(-kappa * std::abs(x));
  return kappa * e / ((1.0 + e) * (1.0 + e));
}

PrimitiveHandle Registry::register_primitive(Primitive primitive) {
  if (primitive.name.empty()) {
    fail(ErrorCode::InvalidArgument, "primitive name must not be empty");
  }
  if (primitives_.count(primitive.name)) {
    fail(ErrorCode::InvalidArgument, "duplicate primitive name '" + primitive.name + "'");
  }
  const bool unary_ok = primitive.forward1 && primitive.backward1;
  const bool binary_ok = primitive.forward2 && primitive.backward2;
  const bool arity_matches = (primitive.arity == 1 && unary_ok && !primitive.forward2 &&
                              !primitive.backward2) ||
                             (primitive.arity == 2 && binary_ok && !primitive.forward1 &&
                              !primitive.backward1);
  if (!arity_matches) {
    fail(ErrorCode::InvalidArgument,
         "primitive '" + primitive.name + "' declares arity " +
             std::to_string(primitive.arity) +
             " but its forward/backward functions do not match that arity");
  }
  auto handle = std::make_shared<const Primitive>(std::move(primitive));
  primitives_.emplace(handle->name, handle);
  return handle;
}

PrimitiveHandle Registry::register_unary(std::string name, UnaryFn forward,
                                         UnaryFn backward, bool surrogate) {
  Primitive p;
  p.name = std::move(name);
  p.arity = 1;
  p.forward1 = std::move(forward);
  p.backward1 = std::move(backward);
  p.surrogate = surrogate;
  return register_primitive(std::move(p));
}

PrimitiveHandle Registry::register_binary(std::string name, BinaryFn forward,
                                          BinaryGradFn backward, bool surrogate) {
  Primitive p;
  p.name = std::move(name);
  p.arity = 2;
  p.forward2 = std::move(forward);
  p.backward2 = std::move(backward);
  p.surrogate = surrogate;
  return register_primitive(std::move(p));
}

bool Registry::contains(std::string_view name) const {
  return primitives_.find(name) != primitives_.end();
}

PrimitiveHandle Registry::find(std::string_view name) const {
  auto it = primitives_.find(name);
  return it == primitives_.end() ? nullptr : it->second;
}

PrimitiveHandle Registry::get(std::string_view name) const {
  auto p = find(name);
  if (!p) fail(ErrorCode::InvalidArgument, "unknown primitive '" + std::string(name) + "'");
  return p;
}

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : primitives_) out.push_back(name);
  return out;
}

std::vector<std::string> Registry::names(int arity) const {
  std::vector<std::string> out;
  for (const auto& [name, p] : primitives_) {
    if (p->arity == arity) out.push_back(name);
  }
  return out;
}

namespace {

Registry make_standard() {
  Registry r;
  r.register_unary("sin", [](double x) { return std::sin(x); },
                   [](double x) { return std::cos(x); });
  r.register_unary("cos", [](double x) { return std::cos(x); },
                   [](double x) { return -std::sin(x); });
  r.register_unary("tanh", [](double x) { return std::tanh(x); },
                   [](double x) {
                     const double t = std::tanh(x);
                     return 1.0 - t * t;
                   });
  r.register_unary("exp", [](double x) { return std::exp(x); },
                   [](double x) { return std::exp(x); });
  r.register_unary("gauss", [](double x) { return std::exp(-x * x); },
                   [](double x) { return -2.0 * x * std::exp(-x * x); });
  r.register_unary("sinh", [](double x) { return std::sinh(x); },
                   [](double x) { return std::cosh(x); });
  r.register_unary("cosh", [](double x) { return std::cosh(x); },
                   [](double x) { return std::sinh(x); });
  r.register_unary("square", [](double x) { return x * x; },
                   [](double x) { return 2.0 * x; });
  r.register_unary("id", [](double x) { return x; }, [](double) { return 1.0; });
  // Kink at 0; derivative taken as sign(x) with sign(0) = 0.
  r.register_unary("abs", [](double x) { return std::abs(x); },
                   [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
  r.register_unary("step", [](double x) { return step(x); },
                   [](double x) { return step_surrogate_derivative(x); },
                   /*surrogate=*/true);
  r.register_binary("add", [](double x, double y) { return x + y; },
                    [](double, double) { return std::array<double, 2>{1.0, 1.0}; });
  r.register_binary("mul", [](double x, double y) { return x * y; },
                    [](double x, double y) { return std::array<double, 2>{y, x}; });
  return r;
}

}  // namespace

const Registry& Registry::standard() {
  static const Registry registry = make_standard();
  return registry;
}

}  // namespace sparsym::diff
