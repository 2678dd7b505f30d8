#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diff/array.hpp"

namespace sparsym::data {

using diff::Array;

enum class Task { Regression, Classification };

const char* to_string(Task task);
Task parse_task(const std::string& name);

struct Standardization {
  std::vector<double> mean;
  std::vector<double> stddev;  // population convention; 0 for constant features
};

struct Dataset {
  Array features;  // [N x n_input]
  Array labels;    // [N x n_output]
  std::vector<std::string> feature_names;  // empty when unnamed
  Task task = Task::Regression;
  std::optional<Standardization> standardization;

  std::size_t size() const { return features.rows(); }
  std::size_t n_input() const { return features.cols(); }
  std::size_t n_output() const { return labels.cols(); }

  /// Throws when the invariants (matching row counts, finite values, one-hot
  /// classification rows) do not hold.
  void validate() const;
};

Dataset select_rows(const Dataset& ds, const std::vector<std::size_t>& rows);

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct Split {
  Dataset train, val, test;
  std::vector<std::size_t> train_rows, val_rows, test_rows;
};

/// Seeded shuffle, then val = round(r_val N), test = round(r_test N) and
/// train takes the remainder.
Split split(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed);

/// Per-feature mean and population stddev over `train`.
Standardization fit_standardization(const Dataset& train);
/// (x - mean) / stddev per feature; stddev == 0 maps the feature to 0.
Dataset apply_standardization(const Dataset& ds, const Standardization& st);
/// Fits on the training split and applies the same statistics to all three.
/// Warns once per constant feature.
void standardize(Split& split);

}  // namespace sparsym::data
