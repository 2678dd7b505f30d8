#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "common/error.hpp"
#include "diff/grad_check.hpp"
#include "net/graph.hpp"
#include "net/network.hpp"
#include "test_support.hpp"

using namespace sparsym;
using namespace sparsym::net;
using diff::Array;

namespace {

double theta(double x) { return x > 0.0 ? 1.0 : 0.0; }

// Straight-line evaluator over the raw parameter arrays, one row at a time.
std::vector<double> oracle_forward(const Network& net, const std::vector<double>& x_in) {
  const auto& reg = diff::Registry::standard();
  std::vector<double> x = x_in;
  if (net.input_gate.has_thresholds()) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= theta(1.0 - net.input_gate.thresholds[i]);
  }
  auto affine = [&](const LinearLayer& L, const std::vector<double>& v) {
    const std::size_t out = L.bias.weights.size();
    std::vector<double> h(out, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double w = L.weight.weights[i * out + j];
        const double m = L.weight.has_thresholds() ? theta(std::abs(w) - L.weight.thresholds[i * out + j]) : 1.0;
        s += v[i] * (w * m);
      }
      const double b = L.bias.weights[j];
      const double mb = L.bias.has_thresholds() ? theta(std::abs(b) - L.bias.thresholds[j]) : 1.0;
      h[j] = s + b * mb;
    }
    return h;
  };
  for (std::size_t l = 0; l < net.spec.layers.size(); ++l) {
    const auto& ops = net.spec.layers[l];
    const auto h = affine(net.linear[l], x);
    std::vector<double> next;
    for (std::size_t k = 0; k < ops.u(); ++k) {
      const double f = reg.get(ops.unary[k])->apply(h[k]);
      const double g = net.unary_gates[l].has_thresholds() ? theta(1.0 - net.unary_gates[l].thresholds[k]) : 1.0;
      next.push_back(f * g + h[k] * (1.0 - g));
    }
    for (std::size_t k = 0; k < ops.b(); ++k) {
      const double a = h[ops.u() + 2 * k], b = h[ops.u() + 2 * k + 1];
      const double f = reg.get(ops.binary[k])->apply(a, b);
      const double g = net.binary_gates[l].has_thresholds() ? theta(1.0 - net.binary_gates[l].thresholds[k]) : 1.0;
      next.push_back(f * g + (a + b) * (1.0 - g));
    }
    x = next;
  }
  return affine(net.linear.back(), x);
}

NetworkSpec small_spec() {
  NetworkSpec s;
  s.input_dim = 4;
  s.output_dim = 1;
  s.layers = {{{"sin", "tanh", "gauss"}, {"mul"}}};
  s.seed = 7;
  return s;
}

Array row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Array({1, n}, std::move(v));
}

}  // namespace

TEST_CASE("build: shapes, initial thresholds and determinism") {
  const auto net = build(small_spec());
  REQUIRE(net.linear.size() == 2);
  CHECK(net.linear[0].weight.weights.shape() == diff::Shape{4, 5});
  CHECK(net.linear[0].bias.weights.shape() == diff::Shape{5});
  CHECK(net.linear[1].weight.weights.shape() == diff::Shape{4, 1});
  CHECK(net.n_weight() == 4 * 5 + 5 + 4 + 1);
  CHECK(net.n_unary() == 3);
  CHECK(net.n_binary() == 1);
  for (const auto& p : trainable_params(net)) {
    if (p.role == ParamRole::Weight) continue;
    for (double t : p.values->values()) CHECK(t == 0.0);
  }
  for (double w : net.unary_gates[0].weights.values()) CHECK(w == 1.0);
  const auto r = sparsity(net);
  CHECK(r.s_weight == 0.0);
  CHECK(r.s_input == 0.0);
  CHECK(r.s_unary == 0.0);
  CHECK(r.s_binary == 0.0);
  CHECK(build(small_spec()) == net);
  auto other = small_spec();
  other.seed = 8;
  CHECK_FALSE(build(other) == net);
}

TEST_CASE("spec validation") {
  auto s = small_spec();
  s.input_dim = 0;
  CHECK_THROWS_AS(build(s), Error);
  s = small_spec();
  s.layers.clear();
  CHECK_THROWS_AS(build(s), Error);
  s = small_spec();
  s.layers[0].unary.push_back("frobnicate");
  CHECK_THROWS_AS(build(s), Error);
  s = small_spec();
  s.layers[0].unary.push_back("step");  // surrogate primitives are not operators
  CHECK_THROWS_AS(build(s), Error);
  s = small_spec();
  s.targets.weight = 1.5;
  CHECK_THROWS_AS(build(s), Error);
  s = small_spec();
  s.decay_rate = 0.0;
  CHECK_THROWS_AS(build(s), Error);
}

TEST_CASE("masked forward matches a straight-line evaluator") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto net = testsupport::random_network(rng);
    Array x({6, net.spec.input_dim});
    for (auto& v : x.values()) v = n(rng);
    const auto y = forward_masked(net, x);
    for (std::size_t r = 0; r < 6; ++r) {
      std::vector<double> xr(x.values().begin() + r * net.spec.input_dim,
                             x.values().begin() + (r + 1) * net.spec.input_dim);
      const auto expect = oracle_forward(net, xr);
      for (std::size_t o = 0; o < expect.size(); ++o) {
        CHECK(std::abs(y.at(r, o) - expect[o]) <= 1e-12 * std::max(1.0, std::abs(expect[o])));
      }
    }
  }
}

TEST_CASE("gate extremes are exact") {
  auto net = build(small_spec());
  // Identity output layer picks each activation in turn.
  for (auto& w : net.linear[0].weight.weights.values()) w = 0.0;
  for (auto& b : net.linear[0].bias.weights.values()) b = 0.0;
  auto& W = net.linear[0].weight.weights;
  W[0 * 5 + 0] = 0.7;  // sin slot <- 0.7 * x0
  W[1 * 5 + 3] = 2.0;  // mul left <- 2 x1
  W[2 * 5 + 4] = 3.0;  // mul right <- 3 x2
  net.linear[1].bias.weights[0] = 0.0;
  auto pick = [&](std::size_t slot) {
    for (std::size_t i = 0; i < 4; ++i) net.linear[1].weight.weights[i] = i == slot ? 1.0 : 0.0;
    return forward_masked(net, row({1.0, 1.0, 1.0, 0.0})).item();
  };
  CHECK(pick(0) == std::sin(0.7));
  CHECK(pick(3) == 6.0);
  net.unary_gates[0].thresholds[0] = 1.0;
  net.binary_gates[0].thresholds[0] = 1.0;
  CHECK(pick(0) == 0.7);
  CHECK(pick(3) == 5.0);
}

TEST_CASE("closed input gate makes the output invariant to that column") {
  std::mt19937_64 rng(5);
  auto net = testsupport::random_network(rng);
  for (auto& t : net.input_gate.thresholds.values()) t = 0.0;
  net.input_gate.thresholds[0] = 1.0;
  Array a({1, net.spec.input_dim}, 0.3), b = a;
  b[0] = -1234.5;
  CHECK(forward_masked(net, a) == forward_masked(net, b));
}

TEST_CASE("masking never mutates weights") {
  auto net = build(small_spec());
  const Array x = row({0.3, -0.2, 0.9, 0.1});
  const auto before = forward_masked(net, x);
  auto saved = net;
  for (auto& l : net.linear) l.weight.thresholds.fill(100.0);
  CHECK_FALSE(forward_masked(net, x) == before);
  for (auto& l : net.linear) l.weight.thresholds.fill(0.0);
  CHECK(forward_masked(net, x) == before);
  CHECK(net == saved);
}

TEST_CASE("sparsity counts and clipping") {
  auto net = build(small_spec());
  auto& w = net.linear[0].weight;
  // |w| <= t counts as pruned, including equality
  w.thresholds[0] = std::abs(w.weights[0]);
  w.thresholds[1] = std::abs(w.weights[1]) + 1.0;
  net.input_gate.thresholds[2] = 1.0;
  net.unary_gates[0].thresholds[1] = 0.999;
  auto r = sparsity(net);
  CHECK(r.weight.pruned == 2);
  CHECK(r.weight.total == net.n_weight());
  CHECK(r.s_weight == doctest::Approx(2.0 / net.n_weight()));
  CHECK(r.s_input == 0.25);
  CHECK(r.s_unary == 0.0);

  w.thresholds[5] = -0.3;
  net.input_gate.thresholds[0] = 1.4;
  net.unary_gates[0].thresholds[0] = 0.6;
  net.linear[1].weight.thresholds[0] = 7.0;
  clip_thresholds(net);
  CHECK(w.thresholds[5] == 0.0);
  CHECK(net.input_gate.thresholds[0] == 1.0);
  CHECK(net.unary_gates[0].thresholds[0] == 0.6);
  CHECK(net.linear[1].weight.thresholds[0] == 7.0);

  auto spec = small_spec();
  spec.layers = {{{"sin"}, {}}};
  r = sparsity(build(spec));
  CHECK(r.s_binary == 1.0);
  CHECK(r.binary.total == 0);
}

TEST_CASE("plain networks have no thresholds") {
  const auto net = build(small_spec(), Gating::Plain);
  for (const auto& p : trainable_params(net)) CHECK(p.role == ParamRole::Weight);
  CHECK_FALSE(gate_closed(net.input_gate, 0));
  Array x = row({0.3, -0.2, 0.9, 0.1});
  auto pruned = build(small_spec(), Gating::Pruned);
  CHECK(forward_masked(net, x) == forward_masked(pruned, x));
}

TEST_CASE("loss graph gradients") {
  auto net = build(small_spec());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& l : net.linear) {
    for (auto& t : l.weight.thresholds.values()) t = 0.05 * (u(rng) + 1);
  }
  ForwardGraph g(net);
  Array x({8, 4}), y({8, 1});
  for (auto& v : x.values()) v = u(rng);
  for (auto& v : y.values()) v = u(rng);
  const auto bind = g.bindings(net, x, &y);
  SUBCASE("smooth paths agree with central differences") {
    const auto r = diff::grad_check(g.tape(), bind, g.mse, Array::scalar(1.0));
    CHECK(r.max_rel_error < 1e-6);
    CHECK(r.surrogate_nodes_excluded > 0);
  }
  SUBCASE("regularizer values") {
    g.tape().forward(bind);
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& l : net.linear) {
      for (double t : l.weight.thresholds.values()) s += std::exp(-t), ++n;
      for (double t : l.bias.thresholds.values()) s += std::exp(-t), ++n;
    }
    CHECK(g.tape().value(g.reg_weight).item() == doctest::Approx(s / n).epsilon(1e-14));
    CHECK(g.tape().value(g.reg_input).item() == doctest::Approx(1.0));
  }
  SUBCASE("width mismatch") {
    CHECK_THROWS_AS(g.run(net, Array({2, 3})), Error);
  }
}
