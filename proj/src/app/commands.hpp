#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "app/config.hpp"
#include "data/dataset.hpp"
#include "expr/expr.hpp"
#include "train/metrics.hpp"

namespace sparsym::app {

struct CommandOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
};

struct PreparedData {
  data::Split split;      // standardized when the config asks for it
  data::Dataset raw_test;  // test rows on the original feature scale
  std::vector<std::string> feature_names;
};

/// Loads, splits (0.6/0.2/0.2 with split_seed) and optionally standardizes.
PreparedData prepare_data(const RunConfig& cfg);

/// Trains one model and writes checkpoint.json, history.csv,
/// expressions.json, expressions.txt (full precision),
/// expressions_display.txt (2 significant figures) and metrics.json into
/// `out_dir`. Returns the metrics document.
nlohmann::json run_training(const RunConfig& cfg, const std::string& out_dir);

nlohmann::json cmd_train(const std::string& config_path, const CommandOptions& options = {});

/// One run per grid cell in <out>/cell_NNN, then scan.csv and scan.json with
/// every cell and the Pareto front over (total complexity, score). Failed
/// cells are recorded and skipped.
nlohmann::json cmd_scan(const std::string& config_path, const CommandOptions& options = {});

struct EvalOptions {
  // For a CSV dataset path.
  std::vector<std::string> label_columns;
  data::Task task = data::Task::Regression;
};

/// `expressions_path`: expressions.json, or a text file with one expression
/// per line. `dataset_path`: a run config (the test split is rebuilt) or a
/// CSV file described by `options`.
nlohmann::json cmd_eval(const std::string& expressions_path, const std::string& dataset_path,
                        const EvalOptions& options = {});

/// Unrolls and simplifies a checkpoint into the three expression files.
nlohmann::json cmd_export(const std::string& checkpoint_path, const std::string& out_dir);

// Expression file helpers.
nlohmann::json expressions_document(const std::vector<expr::Expr>& exprs,
                                    const std::vector<std::string>& feature_names,
                                    std::size_t n_input);
void write_expressions(const std::string& dir, const std::vector<expr::Expr>& exprs,
                       const std::vector<std::string>& feature_names, std::size_t n_input);
struct ExpressionSet {
  std::vector<expr::Expr> exprs;
  std::vector<std::string> feature_names;
};
ExpressionSet read_expressions(const std::string& path,
                               const std::vector<std::string>& feature_names = {});

nlohmann::json metrics_json(const train::Metrics& m, data::Task task,
                            const std::vector<expr::Expr>& exprs, std::size_t n_samples);

}  // namespace sparsym::app
