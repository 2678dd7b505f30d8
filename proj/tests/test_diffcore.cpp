#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "common/error.hpp"
#include "diff/grad_check.hpp"
#include "diff/primitive.hpp"
#include "diff/tape.hpp"

using namespace sparsym;
using namespace sparsym::diff;

namespace {

// Independent central difference of f at x.
template <typename F>
double central(F&& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

}  // namespace

TEST_CASE("step and its surrogate") {
  CHECK(step(0.0) == 0.0);
  CHECK(step(-1e-300) == 0.0);
  CHECK(step(1e-300) == 1.0);
  CHECK(step_surrogate_derivative(0.0) == 1.25);
  // kappa e^{-kappa x} / (1 + e^{-kappa x})^2 by hand at x = 0.3
  const double e = std::exp(-1.5);
  CHECK(step_surrogate_derivative(0.3) == doctest::Approx(5.0 * e / ((1 + e) * (1 + e))).epsilon(1e-15));
  CHECK(step_surrogate_derivative(0.7) == doctest::Approx(step_surrogate_derivative(-0.7)));
}

TEST_CASE("standard registry backward rules match central differences") {
  const auto& reg = Registry::standard();
  for (const auto& name : reg.names(1)) {
    auto p = reg.get(name);
    if (p->surrogate || name == "abs") continue;
    for (double x : {-1.3, -0.2, 0.4, 1.1}) {
      CAPTURE(name);
      CAPTURE(x);
      CHECK(p->backward1(x) == doctest::Approx(central(p->forward1, x)).epsilon(1e-7));
    }
  }
  auto mul = reg.get("mul");
  const auto g = mul->backward2(1.5, -2.0);
  CHECK(g[0] == -2.0);
  CHECK(g[1] == 1.5);
  auto gauss = reg.get("gauss");
  CHECK(gauss->apply(0.0) == 1.0);
  CHECK(gauss->backward1(0.5) == doctest::Approx(-2 * 0.5 * std::exp(-0.25)));
  CHECK(reg.get("step")->surrogate);
}

TEST_CASE("registry rejects duplicates, empty names and unknown lookups") {
  Registry r;
  r.register_unary("sin", [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); });
  CHECK_THROWS_AS(r.register_unary("sin", [](double x) { return x; }, [](double) { return 1.0; }), Error);
  CHECK_THROWS_AS(r.register_unary("", [](double x) { return x; }, [](double) { return 1.0; }), Error);
  try {
    r.get("nope");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  CHECK(r.find("nope") == nullptr);
  CHECK(r.contains("sin"));
}

TEST_CASE("matmul, row ops and reductions against hand values") {
  Tape t;
  auto a = t.input("a", {2, 3});
  auto b = t.input("b", {3, 2});
  auto r = t.input("r", {2});
  auto m = t.add_row(t.matmul(a, b), r);
  auto s = t.sum(m);
  Bindings bind{{"a", Array::matrix(2, 3, {1, 2, 3, 4, 5, 6})},
                {"b", Array::matrix(3, 2, {1, 0, 0, 1, 1, 1})},
                {"r", Array::vector({10, 20})}};
  t.forward(bind);
  CHECK(t.value(m) == Array::matrix(2, 2, {14, 25, 20, 31}));
  CHECK(t.value(s).item() == 90.0);
  const auto g = t.backward(s, Array::scalar(1.0));
  // d sum / d a[i][k] = sum_j b[k][j]
  CHECK(g.at("a") == Array::matrix(2, 3, {1, 1, 2, 1, 1, 2}));
  CHECK(g.at("b") == Array::matrix(3, 2, {5, 5, 7, 7, 9, 9}));
  CHECK(g.at("r") == Array::vector({2, 2}));
}

TEST_CASE("shape mismatches and unbound inputs are reported") {
  Tape t;
  auto a = t.input("a", {kAnyDim, 2});
  auto w = t.input("w", {3, 1});
  auto y = t.matmul(a, w);
  (void)y;
  try {
    t.forward({{"a", Array({4, 2})}, {"w", Array({3, 1})}});
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Shape);
  }
  CHECK_THROWS_AS(t.forward({{"a", Array({4, 2})}}), Error);
  CHECK_THROWS_AS(t.input("a", {1}), Error);
}

TEST_CASE("tape re-runs with new bindings and batch sizes") {
  Tape t;
  auto x = t.input("x", {kAnyDim, 1});
  auto y = t.mean(t.apply("sin", x));
  t.forward({{"x", Array::matrix(2, 1, {0.0, 1.0})}});
  CHECK(t.value(y).item() == doctest::Approx(std::sin(1.0) / 2));
  t.forward({{"x", Array::matrix(3, 1, {1.0, 2.0, 3.0})}});
  CHECK(t.value(y).item() == doctest::Approx((std::sin(1.0) + std::sin(2.0) + std::sin(3.0)) / 3));
}

TEST_CASE("multi-output backward is the seeded sum") {
  Tape t;
  auto x = t.input("x", {3});
  auto a = t.sum(t.apply("square", x));
  auto b = t.sum(t.apply("sin", x));
  Bindings bind{{"x", Array::vector({0.1, -0.4, 0.9})}};
  t.forward(bind);
  std::vector<Var> outs{a, b};
  std::vector<Array> seeds{Array::scalar(2.0), Array::scalar(-0.5)};
  const auto g = t.backward(outs, seeds);
  for (std::size_t i = 0; i < 3; ++i) {
    const double xi = bind.at("x")[i];
    CHECK(g.at("x")[i] == doctest::Approx(2.0 * 2 * xi - 0.5 * std::cos(xi)));
  }
}

TEST_CASE("surrogate backward versus smooth-only mode") {
  Tape t;
  auto w = t.input("w", {2});
  auto th = t.input("t", {2});
  // w * step(|w| - t), the weight mask
  auto mask = t.apply("step", t.sub(t.apply("abs", w), th));
  auto out = t.sum(t.mul(w, mask));
  t.forward({{"w", Array::vector({0.5, -0.2})}, {"t", Array::vector({0.5, 0.1})}});
  CHECK(t.surrogate_count() == 1);
  const auto sur = t.backward(out, Array::scalar(1.0));
  // d/dt: -w * kappa-sigmoid'(|w| - t). At |w| - t = 0 this is -0.5 * 1.25.
  CHECK(sur.at("t")[0] == doctest::Approx(-0.5 * 1.25));
  const auto smooth = t.backward(out, Array::scalar(1.0), BackwardMode::SmoothOnly);
  CHECK(smooth.at("t")[0] == 0.0);
  CHECK(smooth.at("t")[1] == 0.0);
  // second weight is kept (0.2 > 0.1): its own gradient passes the mask
  CHECK(smooth.at("w")[1] == 1.0);
}

TEST_CASE("grad_check on a two-layer composite") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.7);
  auto fill = [&](Shape s) {
    Array a(s);
    for (auto& v : a.values()) v = n(rng);
    return a;
  };
  const auto& reg = Registry::standard();
  Tape t;
  auto x = t.input("x", {kAnyDim, 3}, false);
  auto w1 = t.input("w1", {3, 4});
  auto b1 = t.input("b1", {4});
  auto w2 = t.input("w2", {3, 1});
  auto h = t.add_row(t.matmul(x, w1), b1);
  auto act = t.concat_cols(t.apply_columns(t.slice_cols(h, 0, 2), {reg.get("sin"), reg.get("gauss")}),
                           t.apply_pairs(t.slice_cols(h, 2, 4), {reg.get("mul")}));
  auto y = t.mean(t.apply("tanh", t.matmul(act, w2)));
  Bindings bind{{"x", fill({5, 3})}, {"w1", fill({3, 4})}, {"b1", fill({4})}, {"w2", fill({3, 1})}};
  const auto r = grad_check(t, bind, y, Array::scalar(1.0));
  CHECK(r.checked == 12 + 4 + 3);
  CHECK(r.max_rel_error < 1e-7);
  CHECK(r.surrogate_nodes_excluded == 0);
}
