#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/dataset.hpp"
#include "data/synth.hpp"
#include "eql/eql.hpp"
#include "net/network.hpp"
#include "train/trainer.hpp"

namespace sparsym::app {

struct DatasetConfig {
  enum class Type { Synthetic, Csv, Idx };
  Type type = Type::Synthetic;
  data::SynthSpec synth;
  // csv
  std::string path;
  std::vector<std::string> label_columns;
  data::Task task = data::Task::Regression;
  // idx
  std::string images, labels;
  std::vector<int> classes;
  // Two-class classification as one 0/1 output (the second class).
  bool single_output = false;
};

enum class Mode { SymbolNet, Eql };

/// Flat JSON run description. Relative paths resolve against the directory
/// of the config file. Unknown keys are rejected.
struct RunConfig {
  Mode mode = Mode::SymbolNet;
  DatasetConfig dataset;
  bool standardize = false;
  std::uint64_t split_seed = 0;
  std::vector<net::OperatorSet> layers;
  net::SparsityTargets targets;
  double decay_rate = 0.01;
  std::uint64_t seed = 0;
  train::TrainConfig train;
  eql::EqlConfig eql;
  std::string output_dir = "run";
  nlohmann::json grid;  // object of key -> list; null when absent

  net::NetworkSpec network_spec(std::size_t input_dim, std::size_t output_dim) const;
};

/// Validates everything that can be checked without touching data.
/// Throws ErrorCode::Config.
RunConfig parse_run_config(const nlohmann::json& j, const std::string& base_dir = ".");
nlohmann::json load_config_json(const std::string& path);
RunConfig load_run_config(const std::string& path);

/// Scan cells: the base config (minus "grid") with one combination of grid
/// values applied, in row-major order over the grid keys sorted by name.
std::vector<nlohmann::json> expand_grid(const nlohmann::json& config);

std::string directory_of(const std::string& path);

}  // namespace sparsym::app
