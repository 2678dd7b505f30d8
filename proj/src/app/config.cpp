#include "app/config.hpp"

#include <filesystem>
#include <set>

#include "app/checkpoint.hpp"
#include "common/error.hpp"

namespace sparsym::app {

namespace fs = std::filesystem;
using nlohmann::json;

std::string directory_of(const std::string& path) {
  auto dir = fs::path(path).parent_path();
  return dir.empty() ? "." : dir.string();
}

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) fail(ErrorCode::Config, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::Config, where + ": key '" + key + "' is missing or has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, where);
}

std::size_t get_count(const json& j, const std::string& key, std::size_t fallback,
                      const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    fail(ErrorCode::Config, where + ": '" + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

DatasetConfig parse_dataset(const json& j, const std::string& base) {
  const std::string where = "dataset";
  if (!j.is_object()) fail(ErrorCode::Config, "'dataset' must be an object");
  DatasetConfig d;
  const auto type = get<std::string>(j, "type", where);
  if (type == "synthetic") {
    d.type = DatasetConfig::Type::Synthetic;
    json spec = j;
    if (j.contains("spec_path")) {
      reject_unknown(j, {"type", "spec_path"}, where);
      const auto path = resolve(base, get<std::string>(j, "spec_path", where));
      spec = read_json_file(path, ErrorCode::Config);
    } else {
      reject_unknown(j, {"type", "formula_text", "n_input", "n_samples", "noise_std", "seed"}, where);
    }
    const std::string sw = "synthetic spec";
    reject_unknown(spec, {"type", "formula_text", "n_input", "n_samples", "noise_std", "seed"}, sw);
    d.synth.formula_text = get<std::string>(spec, "formula_text", sw);
    d.synth.n_input = get_count(spec, "n_input", 0, sw);
    d.synth.n_samples = get_count(spec, "n_samples", 0, sw);
    d.synth.noise_std = get_or<double>(spec, "noise_std", 0.0, sw);
    d.synth.seed = get_or<std::uint64_t>(spec, "seed", 0, sw);
    if (d.synth.n_input == 0 || d.synth.n_samples == 0) {
      fail(ErrorCode::Config, "synthetic spec needs positive n_input and n_samples");
    }
    if (!(d.synth.noise_std >= 0.0)) fail(ErrorCode::Config, "noise_std must be >= 0");
  } else if (type == "csv") {
    d.type = DatasetConfig::Type::Csv;
    reject_unknown(j, {"type", "path", "label_columns", "task", "single_output"}, where);
    d.path = resolve(base, get<std::string>(j, "path", where));
    d.label_columns = get<std::vector<std::string>>(j, "label_columns", where);
    if (d.label_columns.empty()) fail(ErrorCode::Config, "dataset.label_columns is empty");
    d.task = data::parse_task(get_or<std::string>(j, "task", "regression", where));
  } else if (type == "idx") {
    d.type = DatasetConfig::Type::Idx;
    reject_unknown(j, {"type", "images", "labels", "classes", "single_output"}, where);
    d.images = resolve(base, get<std::string>(j, "images", where));
    d.labels = resolve(base, get<std::string>(j, "labels", where));
    d.classes = get_or<std::vector<int>>(j, "classes", {}, where);
    d.task = data::Task::Classification;
  } else {
    fail(ErrorCode::Config, "unknown dataset type '" + type + "' (synthetic, csv or idx)");
  }
  d.single_output = get_or<bool>(j, "single_output", false, where);
  if (d.single_output && d.task != data::Task::Classification) {
    fail(ErrorCode::Config, "single_output needs a classification dataset");
  }
  if (d.single_output && d.type == DatasetConfig::Type::Idx && d.classes.size() != 2) {
    fail(ErrorCode::Config, "single_output needs exactly two classes");
  }
  return d;
}

const std::set<std::string>& top_level_keys() {
  static const std::set<std::string> keys = {
      "mode",         "dataset",      "standardize",  "split_seed",     "layers",
      "unary_ops",    "binary_ops",   "u",            "b",              "n_layers",
      "alpha_weight", "alpha_input",  "alpha_unary",  "alpha_binary",   "decay_rate",
      "seed",         "epochs",       "batch_size",   "learning_rate",  "beta1",
      "beta2",        "epsilon",      "shuffle",      "checkpoint_every", "lambda",
      "a",            "hard_threshold", "stage_fractions", "stage_epochs", "output_dir",
      "grid"};
  return keys;
}

std::vector<net::OperatorSet> parse_layers(const json& j) {
  const std::string where = "config";
  const bool explicit_layers = j.contains("layers");
  const bool palette = j.contains("unary_ops") || j.contains("binary_ops") || j.contains("u") ||
                       j.contains("b") || j.contains("n_layers");
  if (explicit_layers && palette) {
    fail(ErrorCode::Config, "give either 'layers' or the u/b palette keys, not both");
  }
  std::vector<net::OperatorSet> layers;
  if (explicit_layers) {
    const auto& arr = j.at("layers");
    if (!arr.is_array()) fail(ErrorCode::Config, "'layers' must be a list");
    for (const auto& l : arr) {
      if (!l.is_object()) fail(ErrorCode::Config, "each layer must be an object");
      reject_unknown(l, {"unary", "binary"}, "layer");
      layers.push_back({get_or<std::vector<std::string>>(l, "unary", {}, "layer"),
                        get_or<std::vector<std::string>>(l, "binary", {}, "layer")});
    }
    return layers;
  }
  // Palette: u unary and b binary slots per layer, cycling through the lists.
  const auto unary_ops = get_or<std::vector<std::string>>(j, "unary_ops", {"sin", "tanh", "gauss"}, where);
  const auto binary_ops = get_or<std::vector<std::string>>(j, "binary_ops", {"mul"}, where);
  const std::size_t u = get_count(j, "u", 4, where);
  const std::size_t b = get_count(j, "b", 2, where);
  const std::size_t n_layers = get_count(j, "n_layers", 1, where);
  if ((u > 0 && unary_ops.empty()) || (b > 0 && binary_ops.empty())) {
    fail(ErrorCode::Config, "palette needs operators for nonzero u or b");
  }
  for (std::size_t k = 0; k < n_layers; ++k) {
    net::OperatorSet ops;
    for (std::size_t i = 0; i < u; ++i) ops.unary.push_back(unary_ops[i % unary_ops.size()]);
    for (std::size_t i = 0; i < b; ++i) ops.binary.push_back(binary_ops[i % binary_ops.size()]);
    layers.push_back(std::move(ops));
  }
  return layers;
}

}  // namespace

net::NetworkSpec RunConfig::network_spec(std::size_t input_dim, std::size_t output_dim) const {
  net::NetworkSpec s;
  s.input_dim = input_dim;
  s.output_dim = output_dim;
  s.layers = layers;
  s.targets = targets;
  s.decay_rate = decay_rate;
  s.seed = seed;
  return s;
}

RunConfig parse_run_config(const json& j, const std::string& base_dir) {
  if (!j.is_object()) fail(ErrorCode::Config, "config must be a JSON object");
  reject_unknown(j, top_level_keys(), "config");
  const std::string where = "config";
  RunConfig c;

  const auto mode = get_or<std::string>(j, "mode", "symbolnet", where);
  if (mode == "symbolnet") c.mode = Mode::SymbolNet;
  else if (mode == "eql") c.mode = Mode::Eql;
  else fail(ErrorCode::Config, "unknown mode '" + mode + "' (symbolnet or eql)");

  if (!j.contains("dataset")) fail(ErrorCode::Config, "config lacks 'dataset'");
  c.dataset = parse_dataset(j.at("dataset"), base_dir);
  c.standardize = get_or<bool>(j, "standardize", false, where);
  c.seed = get_or<std::uint64_t>(j, "seed", 0, where);
  c.split_seed = get_or<std::uint64_t>(j, "split_seed", c.seed, where);

  c.layers = parse_layers(j);
  c.targets.weight = get_or<double>(j, "alpha_weight", 0.0, where);
  c.targets.input = get_or<double>(j, "alpha_input", 0.0, where);
  c.targets.unary = get_or<double>(j, "alpha_unary", 0.0, where);
  c.targets.binary = get_or<double>(j, "alpha_binary", 0.0, where);
  c.decay_rate = get_or<double>(j, "decay_rate", 0.01, where);

  c.train.epochs = get_count(j, "epochs", 200, where);
  c.train.batch_size = get_count(j, "batch_size", 1024, where);
  c.train.learning_rate = get_or<double>(j, "learning_rate", 0.0015, where);
  c.train.beta1 = get_or<double>(j, "beta1", 0.9, where);
  c.train.beta2 = get_or<double>(j, "beta2", 0.999, where);
  c.train.epsilon = get_or<double>(j, "epsilon", 1e-8, where);
  c.train.shuffle = get_or<bool>(j, "shuffle", true, where);
  c.train.checkpoint_every = get_count(j, "checkpoint_every", 0, where);
  c.train.seed = c.seed;

  c.eql.lambda = get_or<double>(j, "lambda", 1e-3, where);
  c.eql.a = get_or<double>(j, "a", 0.01, where);
  c.eql.hard_threshold = get_or<double>(j, "hard_threshold", 1e-2, where);
  if (j.contains("stage_fractions")) {
    auto f = get<std::vector<double>>(j, "stage_fractions", where);
    if (f.size() != 3) fail(ErrorCode::Config, "stage_fractions needs three entries");
    c.eql.stage_fractions = {f[0], f[1], f[2]};
  }
  if (j.contains("stage_epochs")) {
    auto e = get<std::vector<std::size_t>>(j, "stage_epochs", where);
    if (e.size() != 3) fail(ErrorCode::Config, "stage_epochs needs three entries");
    c.eql.stage_epochs = {e[0], e[1], e[2]};
  }
  c.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "run", where));

  if (j.contains("grid")) {
    c.grid = j.at("grid");
    if (!c.grid.is_object() || c.grid.empty()) fail(ErrorCode::Config, "'grid' must be a nonempty object");
    for (const auto& [key, values] : c.grid.items()) {
      if (!top_level_keys().count(key) || key == "grid" || key == "dataset" || key == "output_dir") {
        fail(ErrorCode::Config, "grid key '" + key + "' is not a scannable config key");
      }
      if (!values.is_array() || values.empty()) {
        fail(ErrorCode::Config, "grid axis '" + key + "' must be a nonempty list");
      }
    }
  }

  // Everything checkable before data is loaded.
  c.network_spec(1, 1).validate();
  c.train.validate();
  if (c.mode == Mode::Eql) {
    c.eql.validate();
    if (c.eql.stage_epochs == std::array<std::size_t, 3>{0, 0, 0}) c.eql.resolve_stages(c.train.epochs);
  }
  return c;
}

json load_config_json(const std::string& path) { return read_json_file(path, ErrorCode::Config); }

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(load_config_json(path), directory_of(path));
}

std::vector<json> expand_grid(const json& config) {
  json base = config;
  json grid = base.contains("grid") ? base["grid"] : json::object();
  base.erase("grid");
  std::vector<json> cells{base};
  // json objects iterate in sorted key order.
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) {
      fail(ErrorCode::Config, "grid axis '" + key + "' must be a nonempty list");
    }
    std::vector<json> next;
    for (const auto& cell : cells) {
      for (const auto& v : values) {
        json c = cell;
        c[key] = v;
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

}  // namespace sparsym::app
