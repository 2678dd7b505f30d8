#include "app/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "app/checkpoint.hpp"
#include "common/error.hpp"
#include "data/csv.hpp"
#include "data/idx.hpp"
#include "data/synth.hpp"
#include "eql/eql.hpp"
#include "expr/json.hpp"
#include "expr/pareto.hpp"
#include "expr/text.hpp"
#include "expr/unroll.hpp"

namespace sparsym::app {

namespace fs = std::filesystem;
using nlohmann::json;

PreparedData prepare_data(const RunConfig& cfg) {
  data::Dataset ds;
  const auto& d = cfg.dataset;
  switch (d.type) {
    case DatasetConfig::Type::Synthetic: ds = data::synth_generate(d.synth); break;
    case DatasetConfig::Type::Csv: ds = data::load_csv(d.path, d.label_columns, d.task); break;
    case DatasetConfig::Type::Idx: ds = data::load_idx(d.images, d.labels, d.classes); break;
  }
  if (d.single_output) {
    if (ds.n_output() != 2) {
      fail(ErrorCode::Config, "single_output needs exactly two classes, dataset has " +
                                  std::to_string(ds.n_output()));
    }
    diff::Array y({ds.size(), 1});
    for (std::size_t r = 0; r < ds.size(); ++r) y.at(r, 0) = ds.labels.at(r, 1);
    ds.labels = std::move(y);
  }
  PreparedData p;
  p.feature_names = ds.feature_names;
  p.split = data::split(ds, {}, cfg.split_seed);
  p.raw_test = p.split.test;
  if (cfg.standardize) data::standardize(p.split);
  return p;
}

json expressions_document(const std::vector<expr::Expr>& exprs,
                          const std::vector<std::string>& feature_names, std::size_t n_input) {
  json list = json::array();
  for (const auto& e : exprs) list.push_back(expr::to_json(e));
  return {{"format", "sparsym-expressions"},
          {"version", 1},
          {"n_input", n_input},
          {"feature_names", feature_names},
          {"expressions", list}};
}

void write_expressions(const std::string& dir, const std::vector<expr::Expr>& exprs,
                       const std::vector<std::string>& feature_names, std::size_t n_input) {
  write_text_file((fs::path(dir) / "expressions.json").string(),
                  expressions_document(exprs, feature_names, n_input).dump(1) + "\n");
  std::string full, display;
  expr::TextOptions full_opt{false, feature_names}, display_opt{true, feature_names};
  for (const auto& e : exprs) {
    full += expr::to_text(e, full_opt) + "\n";
    display += expr::to_text(e, display_opt) + "\n";
  }
  write_text_file((fs::path(dir) / "expressions.txt").string(), full);
  write_text_file((fs::path(dir) / "expressions_display.txt").string(), display);
}

ExpressionSet read_expressions(const std::string& path, const std::vector<std::string>& feature_names) {
  ExpressionSet out;
  if (fs::path(path).extension() == ".json") {
    json j = read_json_file(path, ErrorCode::Parse);
    const json* list = &j;
    if (j.is_object()) {
      if (!j.contains("expressions")) fail(ErrorCode::Parse, path + ": no \"expressions\" list");
      list = &j["expressions"];
      if (j.contains("feature_names") && j["feature_names"].is_array()) {
        out.feature_names = j["feature_names"].get<std::vector<std::string>>();
      }
    }
    if (!list->is_array()) fail(ErrorCode::Parse, path + ": expressions must be a list");
    for (const auto& e : *list) out.exprs.push_back(expr::from_json(e));
  } else {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
    out.feature_names = feature_names;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
      try {
        out.exprs.push_back(expr::parse_text(line, feature_names));
      } catch (const Error& e) {
        fail(ErrorCode::Parse, path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  if (out.exprs.empty()) fail(ErrorCode::Parse, path + ": no expressions");
  return out;
}

json metrics_json(const train::Metrics& m, data::Task task, const std::vector<expr::Expr>& exprs,
                  std::size_t n_samples) {
  json j;
  j["task"] = data::to_string(task);
  j["n_samples"] = n_samples;
  j["mse"] = m.mse;
  j["accuracy"] = m.accuracy ? json(*m.accuracy) : json(nullptr);
  json auc = json::array();
  for (const auto& a : m.auc) auc.push_back(a ? json(*a) : json(nullptr));
  j["auc"] = auc;
  json complexity = json::array();
  std::size_t total = 0;
  for (const auto& e : exprs) {
    const auto c = expr::complexity(e);
    complexity.push_back(c);
    total += c;
  }
  j["complexity"] = complexity;
  j["total_complexity"] = total;
  j["mean_complexity"] = exprs.empty() ? 0.0 : static_cast<double>(total) / exprs.size();
  return j;
}

namespace {

json sparsity_json(const net::Network& n) {
  const auto r = net::sparsity(n);
  return {{"s_weight", r.s_weight}, {"s_input", r.s_input}, {"s_unary", r.s_unary},
          {"s_binary", r.s_binary}};
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create directory '" + dir + "': " + ec.message());
}

}  // namespace

json run_training(const RunConfig& cfg, const std::string& out_dir) {
  PreparedData data = prepare_data(cfg);
  ensure_dir(out_dir);
  const auto& train_ds = data.split.train;
  const auto spec = cfg.network_spec(train_ds.n_input(), train_ds.n_output());
  auto path = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

  Checkpoint ckpt;
  ckpt.standardization = data.split.train.standardization;
  ckpt.feature_names = data.feature_names;
  ckpt.task = train_ds.task;

  net::Network final_net;
  train::TrainHistory history;
  json extra = json::object();
  try {
    if (cfg.mode == Mode::SymbolNet) {
      auto hook = [&](const net::Network& n, std::size_t epoch) {
        Checkpoint c = ckpt;
        c.net = n;
        c.epoch = epoch;
        char name[64];
        std::snprintf(name, sizeof name, "checkpoint_epoch%04zu.json", epoch);
        save_checkpoint(path(name), c);
      };
      auto r = train::train(net::build(spec, net::Gating::Pruned), data.split, cfg.train, hook);
      final_net = std::move(r.net);
      history = std::move(r.history);
    } else {
      auto r = eql::train_three_stage(net::build(spec, net::Gating::Plain), data.split, cfg.eql,
                                      cfg.train);
      final_net = std::move(r.net);
      history = std::move(r.history);
      extra["pruned_at_stage3"] = r.pruned_at_stage3;
      extra["degenerate"] = r.degenerate;
    }
  } catch (const train::TrainingAborted& e) {
    Checkpoint c = ckpt;
    c.net = e.last_good();
    c.epoch = e.history().rows.empty() ? 0 : e.history().rows.back().epoch;
    save_checkpoint(path("checkpoint_last_good.json"), c);
    write_text_file(path("history.csv"), e.history().to_csv());
    throw;
  }

  ckpt.net = final_net;
  ckpt.epoch = cfg.train.epochs;
  save_checkpoint(path("checkpoint.json"), ckpt);
  write_text_file(path("history.csv"), history.to_csv());

  const auto exprs = expr::unroll_simplified(final_net, ckpt.standardization);
  write_expressions(out_dir, exprs, data.feature_names, spec.input_dim);

  const auto m = train::evaluate(exprs, data.raw_test);
  json metrics = metrics_json(m, data.raw_test.task, exprs, data.raw_test.size());
  metrics["mode"] = cfg.mode == Mode::SymbolNet ? "symbolnet" : "eql";
  metrics["seed"] = cfg.seed;
  metrics["sparsity"] = sparsity_json(final_net);
  metrics["epochs"] = cfg.train.epochs;
  for (auto& [k, v] : extra.items()) metrics[k] = v;
  write_text_file(path("metrics.json"), metrics.dump(1) + "\n");
  return metrics;
}

namespace {

json with_overrides(json j, const CommandOptions& options) {
  if (options.seed) j["seed"] = *options.seed;
  if (options.out_dir) j["output_dir"] = fs::absolute(*options.out_dir).string();
  return j;
}

}  // namespace

json cmd_train(const std::string& config_path, const CommandOptions& options) {
  json j = with_overrides(load_config_json(config_path), options);
  if (j.contains("grid")) fail(ErrorCode::Config, "config has a 'grid'; use the scan command");
  const RunConfig cfg = parse_run_config(j, directory_of(config_path));
  json metrics = run_training(cfg, cfg.output_dir);
  return {{"output_dir", cfg.output_dir}, {"metrics", metrics}};
}

json cmd_scan(const std::string& config_path, const CommandOptions& options) {
  json base = with_overrides(load_config_json(config_path), options);
  if (!base.contains("grid")) fail(ErrorCode::Config, "scan config needs a 'grid' object");
  const std::string base_dir = directory_of(config_path);
  const RunConfig base_cfg = parse_run_config(base, base_dir);
  // Every cell sees the same split; only the model seed varies per cell.
  base["split_seed"] = base_cfg.split_seed;

  auto cells = expand_grid(base);
  std::vector<RunConfig> configs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i]["seed"] = eql::cell_seed(base_cfg.seed, i);
    configs.push_back(parse_run_config(cells[i], base_dir));
  }

  const std::string out_dir = base_cfg.output_dir;
  ensure_dir(out_dir);
  json rows = json::array();
  std::vector<expr::ParetoPoint> points;
  std::string csv = "cell,seed,total_complexity,mean_complexity,score,mse,accuracy,status";
  for (const auto& [key, values] : base["grid"].items()) csv += "," + key;
  csv += "\n";

  for (std::size_t i = 0; i < configs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "cell_%03zu", i);
    json row = {{"cell", i}, {"seed", configs[i].seed}, {"dir", name}};
    json overrides = json::object();
    for (const auto& [key, values] : base["grid"].items()) overrides[key] = cells[i][key];
    row["overrides"] = overrides;
    try {
      json m = run_training(configs[i], (fs::path(out_dir) / name).string());
      const double score = m["accuracy"].is_null() ? -m["mse"].get<double>() : m["accuracy"].get<double>();
      row["total_complexity"] = m["total_complexity"];
      row["mean_complexity"] = m["mean_complexity"];
      row["score"] = score;
      row["mse"] = m["mse"];
      row["accuracy"] = m["accuracy"];
      row["status"] = "ok";
      points.push_back({m["total_complexity"].get<std::size_t>(), score, i});
    } catch (const Error& e) {
      row["status"] = "failed";
      row["error"] = e.what();
      warn(std::string(name) + " failed: " + e.what());
    }
    std::ostringstream line;
    line << i << ',' << configs[i].seed << ',';
    if (row["status"] == "ok") {
      line << row["total_complexity"].dump() << ',' << row["mean_complexity"].dump() << ','
           << row["score"].dump() << ',' << row["mse"].dump() << ','
           << (row["accuracy"].is_null() ? "" : row["accuracy"].dump()) << ",ok";
    } else {
      line << ",,,,,failed";
    }
    for (const auto& [key, v] : overrides.items()) line << ',' << v.dump();
    csv += line.str() + "\n";
    rows.push_back(std::move(row));
  }

  json front = json::array();
  for (const auto& p : expr::pareto_front(points)) {
    front.push_back({{"cell", p.id}, {"total_complexity", p.complexity}, {"score", p.score}});
  }
  json report = {{"output_dir", out_dir}, {"cells", rows}, {"front", front}};
  write_text_file((fs::path(out_dir) / "scan.csv").string(), csv);
  write_text_file((fs::path(out_dir) / "scan.json").string(), report.dump(1) + "\n");
  return report;
}

json cmd_eval(const std::string& expressions_path, const std::string& dataset_path,
              const EvalOptions& options) {
  data::Dataset ds;
  std::vector<std::string> names;
  if (fs::path(dataset_path).extension() == ".json") {
    const RunConfig cfg = load_run_config(dataset_path);
    PreparedData p = prepare_data(cfg);
    ds = std::move(p.raw_test);
    names = p.feature_names;
  } else {
    if (options.label_columns.empty()) {
      fail(ErrorCode::InvalidArgument, "evaluating on a CSV needs label columns");
    }
    ds = data::load_csv(dataset_path, options.label_columns, options.task);
    names = ds.feature_names;
  }
  ExpressionSet set = read_expressions(expressions_path, names);
  if (set.exprs.size() != ds.n_output()) {
    fail(ErrorCode::Shape, std::to_string(set.exprs.size()) + " expressions for " +
                               std::to_string(ds.n_output()) + " classes/outputs");
  }
  const auto m = train::evaluate(set.exprs, ds);
  return metrics_json(m, ds.task, set.exprs, ds.size());
}

json cmd_export(const std::string& checkpoint_path, const std::string& out_dir) {
  const Checkpoint c = load_checkpoint(checkpoint_path);
  ensure_dir(out_dir);
  const auto exprs = expr::unroll_simplified(c.net, c.standardization);
  write_expressions(out_dir, exprs, c.feature_names, c.net.spec.input_dim);
  json complexity = json::array();
  for (const auto& e : exprs) complexity.push_back(expr::complexity(e));
  return {{"output_dir", out_dir}, {"outputs", exprs.size()}, {"complexity", complexity}};
}

}  // namespace sparsym::app
