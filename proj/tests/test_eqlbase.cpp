#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "common/error.hpp"
#include "data/dataset.hpp"
#include "data/synth.hpp"
#include "eql/eql.hpp"
#include "expr/text.hpp"
#include "net/graph.hpp"
#include "train/metrics.hpp"
#include "train/trainer.hpp"

using namespace sparsym;
using net::l05_star;

namespace {

data::Split make_split(const std::string& formula, std::size_t n_input, std::size_t n,
                       std::uint64_t seed = 1) {
  auto ds = data::synth_generate(expr::parse_text(formula), n_input, n, 0.0, seed);
  return data::split(ds, {}, seed);
}

net::NetworkSpec small_spec(std::size_t in, std::uint64_t seed = 2) {
  net::NetworkSpec s;
  s.input_dim = in;
  s.output_dim = 1;
  s.layers = {{{"sin", "tanh"}, {"mul"}}};
  s.seed = seed;
  return s;
}

std::size_t nonzero_weights(const net::Network& n) {
  std::size_t c = 0;
  for (const auto& l : n.linear) {
    for (const auto* t : {&l.weight, &l.bias}) {
      for (std::size_t i = 0; i < t->weights.size(); ++i) c += t->weights[i] != 0.0;
    }
  }
  return c;
}

bool frozen_are_zero(const net::Network& n) {
  for (const auto& l : n.linear) {
    for (const auto* t : {&l.weight, &l.bias}) {
      for (std::size_t i = 0; i < t->weights.size(); ++i) {
        if (t->is_frozen(i) && t->weights[i] != 0.0) return false;
      }
    }
  }
  return true;
}

// Independent evaluation of the knee polynomial.
double knee(double w, double a) {
  const double w2 = w * w;
  return std::sqrt(-w2 * w2 / (8 * a * a * a) + 3 * w2 / (4 * a) + 3 * a / 8);
}

}  // namespace

TEST_CASE("l05_star: values, knee continuity, evenness") {
  CHECK(l05_star(0.04, 0.01) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(l05_star(0.01, 0.01) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(knee(0.01, 0.01) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(l05_star(0.0, 0.01) == doctest::Approx(std::sqrt(3 * 0.01 / 8)).epsilon(1e-14));
  CHECK(l05_star(0.0, 0.01) == doctest::Approx(0.061237).epsilon(1e-5));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> wd(-0.05, 0.05), ad(1e-4, 0.1);
  for (int i = 0; i < 1000; ++i) {
    const double w = wd(rng), a = ad(rng);
    CHECK(l05_star(w, a) == l05_star(-w, a));
    const double expect = std::abs(w) >= a ? std::sqrt(std::abs(w)) : knee(w, a);
    CHECK(l05_star(w, a) == doctest::Approx(expect).epsilon(1e-12));
    // both branches meet at |w| = a
    CHECK(knee(a, a) == doctest::Approx(std::sqrt(a)).epsilon(1e-12));
    CHECK(l05_star(a * (1 - 1e-9), a) == doctest::Approx(l05_star(a * (1 + 1e-9), a)).epsilon(1e-8));
  }

  // derivative against a central difference, both branches
  for (double w : {-0.3, -0.02, -0.004, 0.003, 0.007, 0.5}) {
    const double h = 1e-7;
    const double fd = (l05_star(w + h, 0.01) - l05_star(w - h, 0.01)) / (2 * h);
    CHECK(net::l05_star_derivative(w, 0.01) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(net::l05_star_derivative(0.0, 0.01) == 0.0);
}

TEST_CASE("config validation and stage allocation") {
  eql::EqlConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.resolve_stages(100) == std::array<std::size_t, 3>{40, 40, 20});
  CHECK(c.resolve_stages(3) == std::array<std::size_t, 3>{1, 1, 1});
  const auto s7 = c.resolve_stages(7);
  CHECK(s7[0] + s7[1] + s7[2] == 7);
  CHECK_THROWS_AS(c.resolve_stages(2), Error);

  c.stage_epochs = {5, 2, 3};
  CHECK(c.resolve_stages(1000) == std::array<std::size_t, 3>{5, 2, 3});
  c.stage_epochs = {5, 0, 3};
  CHECK_THROWS_AS(c.validate(), Error);

  eql::EqlConfig bad;
  bad.a = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {};
  bad.lambda = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {};
  bad.stage_fractions = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(bad.validate(), Error);

  const auto split = make_split("x0", 1, 50);
  train::TrainConfig t;
  t.epochs = 3;
  CHECK_THROWS_AS(eql::train_three_stage(net::build(small_spec(1)), split, {}, t), Error);
}

TEST_CASE("hard_prune zeroes and freezes small weights") {
  auto n = net::build(small_spec(2), net::Gating::Plain);
  const std::size_t total = n.n_weight();
  CHECK(eql::hard_prune(n, 0.0) == 0);
  CHECK(nonzero_weights(n) == total);
  const std::size_t pruned = eql::hard_prune(n, std::numeric_limits<double>::infinity());
  CHECK(pruned == total);
  CHECK(nonzero_weights(n) == 0);
  CHECK(eql::hard_prune(n, 1.0) == 0);  // already frozen
}

TEST_CASE("three stages: history shape, thresholds 0 and infinity") {
  const auto split = make_split("sin(x0) + x1", 2, 300);
  train::TrainConfig t;
  t.epochs = 10;
  t.batch_size = 32;
  t.learning_rate = 0.01;
  eql::EqlConfig e;
  e.lambda = 1e-3;

  SUBCASE("hard_threshold 0 keeps the support") {
    e.hard_threshold = 0.0;
    const auto r = eql::train_three_stage(net::build(small_spec(2), net::Gating::Plain), split, e, t);
    CHECK(r.pruned_at_stage3 == 0);
    CHECK_FALSE(r.degenerate);
    CHECK(nonzero_weights(r.net) == r.net.n_weight());
    REQUIRE(r.history.rows.size() == 11);
    CHECK(r.history.rows[0].stage == 0);
    std::vector<int> stages;
    for (const auto& row : r.history.rows) stages.push_back(row.stage);
    CHECK(stages == std::vector<int>{0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3});
    for (const auto& row : r.history.rows) {
      if (row.stage == 2) CHECK(row.l_penalty > 0.0);
      else CHECK(row.l_penalty == 0.0);
      CHECK(row.total == doctest::Approx(row.l_error + row.l_penalty).epsilon(1e-12));
    }
  }

  SUBCASE("hard_threshold infinity gives a constant model") {
    e.hard_threshold = std::numeric_limits<double>::infinity();
    const auto r = eql::train_three_stage(net::build(small_spec(2), net::Gating::Plain), split, e, t);
    CHECK(r.degenerate);
    CHECK(r.pruned_at_stage3 == r.net.n_weight());
    CHECK(nonzero_weights(r.net) == 0);
    const auto pred = net::forward_masked(r.net, split.test.features);
    for (std::size_t i = 0; i < pred.size(); ++i) CHECK(pred[i] == 0.0);
  }
}

TEST_CASE("frozen weights stay exactly zero through every stage-3 step") {
  const auto split = make_split("sin(x0) * x1", 2, 200);
  train::TrainConfig t;
  t.epochs = 1;
  t.batch_size = 1000;  // one step per epoch
  t.learning_rate = 0.05;
  train::Session s(net::build(small_spec(2), net::Gating::Plain), split, t, 0.01);
  for (int i = 0; i < 5; ++i) s.run_epoch(1e-2);
  auto& n = s.network();
  const std::size_t pruned = eql::hard_prune(n, 0.3);
  REQUIRE(pruned > 0);
  REQUIRE(pruned < n.n_weight());
  for (std::size_t k = 0; k < n.linear.size(); ++k) {
    const std::string p = "L" + std::to_string(k) + ".";
    train::reset_moments(s.adam(), p + "w", n.linear[k].weight.frozen);
    train::reset_moments(s.adam(), p + "b", n.linear[k].bias.frozen);
  }
  const std::size_t live = nonzero_weights(n);
  for (int step = 0; step < 30; ++step) {
    s.run_epoch(0.0);
    CHECK(frozen_are_zero(n));
    CHECK(nonzero_weights(n) <= live);
  }
}

TEST_CASE("stage 1 matches plain training") {
  const auto split = make_split("x0 * x1", 2, 200);
  train::TrainConfig t;
  t.epochs = 6;
  t.batch_size = 16;
  t.learning_rate = 0.01;
  t.seed = 9;
  const auto plain = train::train(net::build(small_spec(2), net::Gating::Plain), split, t);

  eql::EqlConfig e;
  e.stage_epochs = {6, 2, 2};
  train::TrainConfig t3 = t;
  t3.epochs = 10;
  const auto staged = eql::train_three_stage(net::build(small_spec(2), net::Gating::Plain), split, e, t3);
  for (std::size_t i = 0; i <= 6; ++i) {
    auto a = plain.history.rows[i];
    auto b = staged.history.rows[i];
    b.stage = 0;
    CHECK(a == b);
  }
}

TEST_CASE("stronger lambda gives sparser support (majority over seeds)") {
  const auto split = make_split("0.5*sin(2*x0) + x1*x2", 4, 1500);
  train::TrainConfig t;
  t.epochs = 60;
  t.batch_size = 64;
  t.learning_rate = 0.005;
  eql::EqlConfig weak, strong;
  weak.lambda = 1e-4;
  strong.lambda = 1e-2;
  weak.hard_threshold = strong.hard_threshold = 0.01;
  int sparser = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto spec = small_spec(4, seed);
    spec.layers = {{{"sin", "tanh", "cos"}, {"mul", "mul"}}};
    t.seed = seed;
    const auto a = eql::train_three_stage(net::build(spec, net::Gating::Plain), split, weak, t);
    const auto b = eql::train_three_stage(net::build(spec, net::Gating::Plain), split, strong, t);
    MESSAGE("seed " << seed << ": support " << nonzero_weights(a.net) << " vs " << nonzero_weights(b.net));
    sparser += nonzero_weights(b.net) < nonzero_weights(a.net);
  }
  CHECK(sparser >= 2);
}

TEST_CASE("scan_grid: point count, ordering, cell seeds") {
  const auto split = make_split("sin(x0) + x1", 2, 150);
  train::TrainConfig t;
  t.epochs = 6;
  t.batch_size = 32;
  t.learning_rate = 0.01;
  t.seed = 4;
  const auto spec = small_spec(2);

  const auto one = eql::scan_grid(spec, split, {1e-3}, {0.01}, {}, t);
  CHECK(one.size() == 1);

  const auto four = eql::scan_grid(spec, split, {1e-4, 1e-1}, {0.01, 0.1}, {}, t);
  REQUIRE(four.size() == 4);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < four.size(); ++i) {
    CHECK(four[i].error.empty());
    CHECK(four[i].complexity >= 1);
    if (i) CHECK(four[i - 1].complexity <= four[i].complexity);
    seeds.insert(four[i].seed);
  }
  CHECK(seeds.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(seeds.count(eql::cell_seed(4, i)) == 1);

  CHECK(eql::cell_seed(4, 2) == eql::cell_seed(4, 2));
  CHECK(eql::cell_seed(4, 2) != eql::cell_seed(5, 2));
  CHECK_THROWS_AS(eql::scan_grid(spec, split, {}, {0.1}, {}, t), Error);
}
