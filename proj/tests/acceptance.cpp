// One PASS/FAIL/SKIP line per acceptance criterion. Exit status is nonzero
// when any criterion fails. `acceptance 1 4 12` runs a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "app/checkpoint.hpp"
#include "app/commands.hpp"
#include "app/config.hpp"
#include "common/error.hpp"
#include "data/csv.hpp"
#include "diff/grad_check.hpp"
#include "diff/primitive.hpp"
#include "expr/simplify.hpp"
#include "expr/text.hpp"
#include "expr/unroll.hpp"
#include "loss/regloss.hpp"
#include "net/graph.hpp"
#include "test_support.hpp"
#include "train/metrics.hpp"
#include "train/trainer.hpp"

using namespace sparsym;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

fs::path config_path(const std::string& name) { return testsupport::source_dir() / "configs" / name; }

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / "sparsym_acceptance" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Writes a copy of a bundled config with some keys replaced. Only used for
// configs without relative paths.
fs::path variant(const std::string& name, const json& changes, const fs::path& dir) {
  json j = app::load_config_json(config_path(name).string());
  for (const auto& [k, v] : changes.items()) j[k] = v;
  const auto p = dir / ("variant_" + name);
  testsupport::write_file(p, j.dump(2));
  return p;
}

json train_seed(const fs::path& config, const fs::path& out, std::uint64_t seed) {
  app::CommandOptions o;
  o.out_dir = out.string();
  o.seed = seed;
  return app::cmd_train(config.string(), o)["metrics"];
}

// --- 1 ---------------------------------------------------------------------
Outcome decay_factor() {
  using loss::decay_factor;
  bool ok = true;
  std::ostringstream why;
  for (double a : {0.4, 0.8}) {
    for (double d : {0.01, 0.1, 1.0}) {
      if (decay_factor(0.0, a, d) != 1.0) ok = false, why << " D(0)!=1 at a=" << a << ",d=" << d;
      for (double s : {a, a + 1e-12, (a + 1) / 2, 1.0}) {
        if (decay_factor(s, a, d) != 0.0) ok = false, why << " D(" << s << ")!=0";
      }
      double prev = decay_factor(0.0, a, d);
      for (int i = 1; i < 1000; ++i) {
        const double cur = decay_factor(static_cast<double>(i) / 999.0, a, d);
        if (cur > prev) {
          ok = false;
          why << " rises at s=" << i / 999.0 << " (a=" << a << ",d=" << d << ")";
          break;
        }
        prev = cur;
      }
    }
  }
  const double v = decay_factor(0.5, 0.8, 1.0);
  const double err = std::abs(v - std::exp(-5.0 / 3.0));
  if (err > 1e-12) ok = false, why << " D(0.5;0.8,1) off by " << err;
  return verdict(ok, "D(0.5;0.8,1)=" + fmt(v) + ", |err|=" + fmt(err) + ", 6 monotone grids" + why.str());
}

// --- 2 ---------------------------------------------------------------------
Outcome gradient_suite() {
  const auto& reg = diff::Registry::standard();
  double worst = 0.0;
  std::string worst_name;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::size_t n_prims = 0;
  auto track = [&](double e, const std::string& name) {
    if (e > worst) worst = e, worst_name = name;
  };
  for (int arity : {1, 2}) {
    for (const auto& name : reg.names(arity)) {
      auto p = reg.get(name);
      if (p->surrogate) continue;
      ++n_prims;
      diff::Tape t;
      auto x = t.input("x", {diff::kAnyDim, 2});
      diff::Array xv(diff::Shape{6, 2});
      for (auto& v : xv.values()) {
        do v = u(rng);
        while (std::abs(v) < 0.05);  // keep abs away from its kink
      }
      diff::Var y = arity == 1 ? t.apply(p, x) : t.apply_pairs(x, {p});
      auto obj = t.sum(y);
      track(diff::grad_check(t, {{"x", xv}}, obj, diff::Array::scalar(1.0)).max_rel_error, name);
    }
  }

  // two symbolic layers with every smooth operator, full loss (mse + regs)
  net::NetworkSpec spec;
  spec.input_dim = 4;
  spec.output_dim = 2;
  spec.layers = {{{"sin", "cos", "tanh", "gauss", "exp", "square", "id"}, {"mul", "mul"}},
                 {{"sin", "tanh", "gauss"}, {"mul"}}};
  spec.targets = {0.5, 0.5, 0.5, 0.5};
  spec.seed = 7;
  auto n = net::build(spec);
  for (auto& l : n.linear) {
    for (auto& t : l.weight.thresholds.values()) t = 0.04 * (u(rng) + 1.5);
  }
  for (auto& g : n.unary_gates) {
    for (auto& t : g.thresholds.values()) t = 0.3 * (u(rng) + 1.5);
  }
  net::ForwardGraph g(n);
  diff::Array x(diff::Shape{10, 4}), y(diff::Shape{10, 2});
  for (auto& v : x.values()) v = u(rng);
  for (auto& v : y.values()) v = u(rng);
  const auto bind = g.bindings(n, x, &y);
  auto& tape = g.tape();
  diff::Var total = tape.add(tape.add(g.mse, g.reg_weight), tape.add(g.reg_input, tape.add(g.reg_unary, g.reg_binary)));
  const auto r = diff::grad_check(tape, bind, total, diff::Array::scalar(1.0));
  track(r.max_rel_error, "composite:" + r.worst_param);

  const double s0 = diff::step_surrogate_derivative(0.0, 5.0);
  const bool ok = worst < 1e-5 && s0 == 1.25;
  return verdict(ok, std::to_string(n_prims) + " primitives + composite (" + std::to_string(r.checked) +
                         " params), max rel err " + fmt(worst) + " [" + worst_name +
                         "], surrogate'(0)=" + fmt(s0));
}

// --- 3 ---------------------------------------------------------------------
Outcome network_expression_equivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0, worst_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = testsupport::random_network(rng, 2, 8);
    const std::size_t d = n.spec.input_dim;
    diff::Array x(diff::Shape{100, d});
    for (auto& v : x.values()) v = u(rng);
    const auto ref = net::forward_masked(n, x);
    const auto ex = expr::unroll_simplified(n);
    for (std::size_t i = 0; i < 100; ++i) {
      std::vector<double> row(x.values().begin() + i * d, x.values().begin() + (i + 1) * d);
      for (std::size_t o = 0; o < n.spec.output_dim; ++o) {
        const double diff = std::abs(expr::eval(ex[o], row) - ref.at(i, o));
        worst = std::max(worst, diff);
        worst_rel = std::max(worst_rel, diff / std::max(1.0, std::abs(ref.at(i, o))));
      }
    }
  }
  return verdict(worst < 1e-9, "100 nets x 100 inputs, max abs diff " + fmt(worst) + " (rel " + fmt(worst_rel) + ")");
}

// --- 4 ---------------------------------------------------------------------
Outcome complexity_oracle() {
  const auto e = expr::parse_text("1.7*tanh(0.3*x2^2) + 2.2*x2*x4*sin(1.1*x3)");
  const std::size_t c = expr::complexity(e);
  std::mt19937_64 rng(4);
  std::size_t mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto t = testsupport::random_tree(rng, 5, 6);
    if (expr::complexity(t) != testsupport::oracle_count(t)) ++mismatches;
  }
  return verdict(c == 17 && mismatches == 0,
                 "example complexity " + std::to_string(c) + ", " + std::to_string(mismatches) + "/1000 oracle mismatches");
}

// --- 5 ---------------------------------------------------------------------
Outcome loss_at_init() {
  const auto cfg = app::load_run_config(config_path("synthetic.json").string());
  const auto data = app::prepare_data(cfg);
  auto c = cfg.train;
  c.epochs = 1;
  const auto r = train::train(net::build(cfg.network_spec(data.split.train.n_input(), data.split.train.n_output())),
                              data.split, c);
  const auto& row = r.history.rows.at(0);
  const double err = std::abs(row.total - 5.0 * row.l_error);
  return verdict(err < 1e-9, "l_error=" + fmt(row.l_error) + ", total=" + fmt(row.total) + ", |total-5 l_error|=" + fmt(err));
}

// --- 6 ---------------------------------------------------------------------
Outcome synthetic_recovery() {
  const auto dir = scratch("c6");
  int good = 0;
  std::ostringstream per;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto out = dir / ("seed" + std::to_string(seed));
    const json m = train_seed(config_path("synthetic.json"), out, seed);
    const auto ck = app::load_checkpoint((out / "checkpoint.json").string());
    std::size_t open = 0;
    for (std::size_t i = 3; i < 16; ++i) open += !net::gate_closed(ck.net.input_gate, i);
    const double mse = m["mse"].get<double>();
    const bool ok = mse < 1e-2 && open == 0;
    good += ok;
    per << " " << seed << ":" << fmt(mse) << "/" << open << (ok ? "" : "x");
  }
  return verdict(good >= 7, std::to_string(good) + "/10 seeds (seed:mse/open distractors)" + per.str());
}

// --- 7 ---------------------------------------------------------------------
Outcome sparsity_convergence() {
  const auto dir = scratch("c7");
  const auto cfg = variant("synthetic.json", {{"alpha_weight", 0.9}}, dir);
  int good = 0;
  std::ostringstream per;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const json m = train_seed(cfg, dir / ("seed" + std::to_string(seed)), seed);
    const double s = m["sparsity"]["s_weight"].get<double>();
    good += s >= 0.85 && s <= 1.0;
    per << " " << fmt(s);
  }
  return verdict(good >= 8, std::to_string(good) + "/10 seeds with s_weight in [0.85,1]:" + per.str());
}

// --- 8 ---------------------------------------------------------------------
Outcome mnist_binary() {
  const auto cfg = config_path("mnist01.json");
  const auto parsed = app::load_run_config(cfg.string());
  if (!fs::exists(parsed.dataset.images) || !fs::exists(parsed.dataset.labels)) {
    return {Status::Skip, "IDX files missing under data/mnist01"};
  }
  const auto dir = scratch("c8");
  int good = 0;
  std::ostringstream per;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const json m = train_seed(cfg, dir / ("seed" + std::to_string(seed)), seed);
    const double acc = m["accuracy"].get<double>();
    const auto c = m["total_complexity"].get<std::size_t>();
    good += acc >= 0.95 && c <= 200;
    per << " " << fmt(acc) << "/" << c;
  }
  return verdict(good >= 7, std::to_string(good) + "/10 seeds (accuracy/complexity):" + per.str());
}

// --- 9 ---------------------------------------------------------------------
Outcome baseline_comparison() {
  const auto dir = scratch("c9");
  app::CommandOptions so, eo;
  so.out_dir = (dir / "symbolnet").string();
  eo.out_dir = (dir / "eql").string();
  const json s = app::cmd_scan(config_path("scan_symbolnet.json").string(), so);
  const json e = app::cmd_scan(config_path("scan_eql.json").string(), eo);
  auto front_of = [](const json& r) {
    std::vector<std::pair<std::size_t, double>> f;
    for (const auto& p : r["front"]) f.emplace_back(p["total_complexity"].get<std::size_t>(), p["score"].get<double>());
    return f;
  };
  const auto fs_ = front_of(s), fe = front_of(e);
  // best score reachable at or below complexity c
  auto best = [](const std::vector<std::pair<std::size_t, double>>& f, std::size_t c) {
    double b = -std::numeric_limits<double>::infinity();
    for (const auto& [k, v] : f) {
      if (k <= c) b = std::max(b, v);
    }
    return b;
  };
  std::set<std::size_t> bins;
  for (const auto& p : fs_) bins.insert(p.first);
  for (const auto& p : fe) bins.insert(p.first);
  std::size_t wins = 0;
  std::ostringstream per;
  for (std::size_t c : bins) {
    const double a = best(fs_, c), b = best(fe, c);
    const bool w = a >= b;
    wins += w;
    per << " c<=" << c << ":" << fmt(a) << (w ? ">=" : "<") << fmt(b);
  }
  const bool ok = !bins.empty() && 2 * wins >= bins.size();
  return verdict(ok, std::to_string(wins) + "/" + std::to_string(bins.size()) +
                         " bins where SymbolNet >= EQL (score = -mse):" + per.str());
}

// --- 10 --------------------------------------------------------------------
Outcome reference_replay() {
  const char* path = std::getenv("SPARSYM_LHC_CSV");
  if (!path || !*path) return {Status::Skip, "set SPARSYM_LHC_CSV to the jet-tagging table to run"};
  const auto root = testsupport::source_dir() / "data/lhc";
  const json schema = json::parse(testsupport::read_file(root / "schema.json"));
  const auto labels = schema["label_columns"].get<std::vector<std::string>>();
  auto ds = data::load_csv(path, labels, data::Task::Classification);
  auto split = data::split(ds, {}, 0);
  data::standardize(split);
  const auto set = app::read_expressions((root / "reference_expressions.txt").string(), ds.feature_names);
  const auto m = train::evaluate(set.exprs, split.test);
  // label order g, q, w, z, t
  const std::vector<double> auc = {0.885, 0.827, 0.894, 0.851, 0.915};
  const std::vector<std::size_t> cx = {16, 12, 23, 8, 24};
  if (set.exprs.size() != 5 || m.auc.size() != 5) return {Status::Fail, "expected five classes"};
  bool ok = true;
  std::ostringstream per;
  for (std::size_t k = 0; k < 5; ++k) {
    const double a = m.auc.at(k).value_or(NAN);
    const std::size_t c = expr::complexity(set.exprs[k]);
    const bool good = std::abs(a - auc[k]) <= 0.03 && c == cx[k];
    ok = ok && good;
    per << " " << labels[k] << ":" << fmt(a) << "/" << c << (good ? "" : "x");
  }
  return verdict(ok, "AUC/complexity per class:" + per.str());
}

// --- 11 --------------------------------------------------------------------
Outcome determinism() {
  const auto dir = scratch("c11");
  app::CommandOptions a, b;
  a.out_dir = (dir / "a").string();
  b.out_dir = (dir / "b").string();
  app::cmd_train(config_path("synthetic.json").string(), a);
  app::cmd_train(config_path("synthetic.json").string(), b);
  const auto ha = testsupport::read_file(dir / "a/history.csv");
  const auto hb = testsupport::read_file(dir / "b/history.csv");
  return verdict(!ha.empty() && ha == hb, std::to_string(ha.size()) + " bytes, identical=" + (ha == hb ? "yes" : "no"));
}

// --- 12 --------------------------------------------------------------------
Outcome parser_round_trip() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  std::size_t skipped = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto t = testsupport::random_tree(rng, 4, 6);
    const auto back = expr::parse_text(expr::to_text(t));
    for (int k = 0; k < 20; ++k) {
      std::vector<double> x(4);
      for (auto& v : x) v = u(rng);
      try {
        worst = std::max(worst, std::abs(expr::eval(t, x) - expr::eval(back, x)));
      } catch (const Error&) {
        ++skipped;
      }
    }
  }
  return verdict(worst <= 1e-12, "1000 trees x 20 points, max diff " + fmt(worst) +
                                     (skipped ? ", " + std::to_string(skipped) + " non-finite points" : ""));
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"decay factor", decay_factor},
      {"gradient suite", gradient_suite},
      {"network/expression equivalence", network_expression_equivalence},
      {"complexity oracle", complexity_oracle},
      {"loss at initialization", loss_at_init},
      {"synthetic recovery", synthetic_recovery},
      {"sparsity convergence", sparsity_convergence},
      {"binary MNIST", mnist_binary},
      {"baseline comparison", baseline_comparison},
      {"reference expression replay", reference_replay},
      {"determinism", determinism},
      {"parser round trip", parser_round_trip},
  };
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::strtoul(argv[i], nullptr, 10));

  set_warning_sink([](const std::string&) {});
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    failures += o.status == Status::Fail;
    std::printf("%s %2zu %s: %s (%.1fs)\n", tag, i + 1, criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
