// Command-line front end. Talks to the engine only through the C API.
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsym/sparsym.h"

namespace {

int exit_code(sparsym_status s) {
  if (s == SPARSYM_OK) return 0;
  if (s == SPARSYM_ERR_CONFIG || s == SPARSYM_ERR_INVALID_ARGUMENT) return 1;
  return 2;
}

int report(sparsym_status s, char* result) {
  if (s != SPARSYM_OK) {
    nlohmann::json err = {{"error", {{"code", sparsym_status_name(s)}, {"message", sparsym_last_error()}}}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return exit_code(s);
  }
  std::printf("%s\n", nlohmann::json::parse(result).dump(2).c_str());
  sparsym_string_free(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse symbolic regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sparsym_version()));

  std::string config, out, expressions, dataset, labels, task = "regression", checkpoint;
  std::optional<std::uint64_t> seed;

  auto* train = app.add_subcommand("train", "train one model from a run config");
  train->add_option("--config", config, "run config JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out, "output directory (overrides output_dir)");
  train->add_option("--seed", seed, "seed override");

  auto* scan = app.add_subcommand("scan", "train one model per grid cell and report the Pareto front");
  scan->add_option("--config", config, "run config JSON with a grid")->required()->check(CLI::ExistingFile);
  scan->add_option("--out", out, "output directory (overrides output_dir)");
  scan->add_option("--seed", seed, "master seed override");

  auto* eval = app.add_subcommand("eval", "evaluate expressions on a dataset");
  eval->add_option("expressions", expressions, "expressions.json or text file")->required()->check(CLI::ExistingFile);
  eval->add_option("dataset", dataset, "run config JSON (test split) or CSV file")->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", labels, "comma separated label columns (CSV only)");
  eval->add_option("--task", task, "regression or classification (CSV only)")
      ->check(CLI::IsMember({"regression", "classification"}));

  auto* exp = app.add_subcommand("export", "unroll a checkpoint into expressions");
  exp->add_option("checkpoint", checkpoint, "checkpoint JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  char* result = nullptr;
  const char* out_dir = out.empty() ? nullptr : out.c_str();
  const int has_seed = seed ? 1 : 0;
  const std::uint64_t seed_value = seed.value_or(0);
  sparsym_status s = SPARSYM_OK;
  if (*train) {
    s = sparsym_cmd_train(config.c_str(), out_dir, has_seed, seed_value, &result);
  } else if (*scan) {
    s = sparsym_cmd_scan(config.c_str(), out_dir, has_seed, seed_value, &result);
  } else if (*eval) {
    s = sparsym_cmd_eval(expressions.c_str(), dataset.c_str(), labels.empty() ? nullptr : labels.c_str(),
                         task.c_str(), &result);
  } else {
    s = sparsym_cmd_export(checkpoint.c_str(), out.c_str(), &result);
  }
  return report(s, result);
}
