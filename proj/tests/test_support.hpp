#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "expr/expr.hpp"
#include "net/network.hpp"

namespace testsupport {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sparsym_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Source tree root, injected by CMake.
inline std::filesystem::path source_dir() { return SPARSYM_SOURCE_DIR; }

// Random architecture with thresholds scattered so that some weights, inputs
// and operators end up pruned and others not.
inline sparsym::net::Network random_network(std::mt19937_64& rng, std::size_t max_layers = 2,
                                            std::size_t max_ops = 8) {
  using namespace sparsym::net;
  std::uniform_int_distribution<std::size_t> in_dim(1, 5), out_dim(1, 3), layers(1, max_layers),
      ops(1, max_ops);
  const std::vector<std::string> unary = {"sin", "cos", "tanh", "gauss", "exp", "square", "id"};
  std::uniform_int_distribution<std::size_t> pick(0, unary.size() - 1);
  NetworkSpec spec;
  spec.input_dim = in_dim(rng);
  spec.output_dim = out_dim(rng);
  const std::size_t n_layers = layers(rng);
  for (std::size_t l = 0; l < n_layers; ++l) {
    OperatorSet set;
    const std::size_t u = ops(rng), b = ops(rng);
    for (std::size_t k = 0; k < u; ++k) set.unary.push_back(unary[pick(rng)]);
    for (std::size_t k = 0; k < b; ++k) set.binary.push_back("mul");
    spec.layers.push_back(set);
  }
  spec.seed = rng();
  Network net = build(spec, Gating::Pruned);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double weight_t = 0.3 * u01(rng);
  const double gate_p = 0.4 * u01(rng);
  auto scatter = [&](PrunableTensor& t, bool gate) {
    for (std::size_t i = 0; i < t.thresholds.size(); ++i) {
      if (gate) t.thresholds[i] = u01(rng) < gate_p ? 1.0 : 0.9 * u01(rng);
      else t.thresholds[i] = weight_t * u01(rng);
    }
  };
  scatter(net.input_gate, true);
  for (auto& layer : net.linear) {
    scatter(layer.weight, false);
    scatter(layer.bias, false);
  }
  for (auto& g : net.unary_gates) scatter(g, true);
  for (auto& g : net.binary_gates) scatter(g, true);
  return net;
}

// Independent recursive count over the flattened form: a node whose parent
// has the same associative op is absorbed into the parent.
inline std::size_t oracle_count(const sparsym::expr::Expr& e, const std::string& parent_op = "") {
  switch (e->kind) {
    case sparsym::expr::Kind::Constant:
    case sparsym::expr::Kind::Variable:
      return 1;
    case sparsym::expr::Kind::Unary:
      return 1 + oracle_count(e->left);
    case sparsym::expr::Kind::Binary: {
      const bool assoc = e->op == "add" || e->op == "mul";
      const std::size_t self = (assoc && e->op == parent_op) ? 0 : 1;
      const std::string pass = assoc ? e->op : "";
      return self + oracle_count(e->left, pass) + oracle_count(e->right, pass);
    }
  }
  return 0;
}

inline sparsym::expr::Expr random_tree(std::mt19937_64& rng, std::size_t n_input, int depth) {
  std::uniform_int_distribution<int> kind(0, depth > 0 ? 3 : 1);
  std::uniform_real_distribution<double> c(-3.0, 3.0);
  static const std::vector<std::string> un = {"sin", "cos", "tanh", "gauss", "id", "square"};
  static const std::vector<std::string> bin = {"add", "mul"};
  switch (kind(rng)) {
    case 0:
      return sparsym::expr::constant(std::uniform_int_distribution<int>(0, 5)(rng) == 0 ? 0.0 : c(rng));
    case 1:
      return sparsym::expr::variable(std::uniform_int_distribution<std::size_t>(0, n_input - 1)(rng));
    case 2:
      return sparsym::expr::unary(un[std::uniform_int_distribution<std::size_t>(0, un.size() - 1)(rng)],
                   random_tree(rng, n_input, depth - 1));
    default: {
      if (std::uniform_int_distribution<int>(0, 7)(rng) == 0) {
        return sparsym::expr::pow(random_tree(rng, n_input, depth - 1), sparsym::expr::constant(2.0));
      }
      return sparsym::expr::binary(bin[std::uniform_int_distribution<std::size_t>(0, 1)(rng)],
                    random_tree(rng, n_input, depth - 1), random_tree(rng, n_input, depth - 1));
    }
  }
}

}  // namespace testsupport
