#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "data/dataset.hpp"
#include "net/network.hpp"
#include "train/trainer.hpp"

namespace sparsym::eql {

struct EqlConfig {
  double lambda = 1e-3;
  double a = 0.01;
  double hard_threshold = 1e-2;
  // Fractions of the epoch budget per stage when stage_epochs is all zero.
  std::array<double, 3> stage_fractions = {0.4, 0.4, 0.2};
  std::array<std::size_t, 3> stage_epochs = {0, 0, 0};

  void validate() const;
  /// Explicit stage_epochs if set, else the fractions of `total` (rounded,
  /// stage 3 takes the remainder). Each stage gets at least one epoch.
  std::array<std::size_t, 3> resolve_stages(std::size_t total) const;
};

struct EqlResult {
  net::Network net;
  train::TrainHistory history;  // stage column 1..3; row 0 is stage 0
  std::size_t pruned_at_stage3 = 0;
  bool degenerate = false;  // every weight and bias pruned
};

/// Stage 1: MSE only. Stage 2: MSE + lambda * sum L0.5*(w). Then every
/// |w| < hard_threshold is set to 0 and frozen, and stage 3 fine-tunes the
/// survivors on MSE alone. `net` must be built with Gating::Plain.
EqlResult train_three_stage(net::Network net, const data::Split& data, const EqlConfig& eql,
                            const train::TrainConfig& cfg);

/// Sets |w| < threshold to exactly 0 and freezes it. Returns how many
/// entries were newly frozen.
std::size_t hard_prune(net::Network& net, double threshold);

struct ScanPoint {
  double lambda = 0.0;
  double hard_threshold = 0.0;
  std::uint64_t seed = 0;
  std::size_t complexity = 0;  // total over outputs
  double score = 0.0;          // accuracy, or -mse for regression
  double mse = 0.0;
  bool degenerate = false;
  std::string error;  // non-empty when the cell failed
};

/// Trains one cell per (lambda, hard_threshold) pair on the same split, with
/// cell seeds derived from `seed` and the cell index. Failed cells are kept
/// with their error and excluded from nothing else. Sorted by complexity.
std::vector<ScanPoint> scan_grid(const net::NetworkSpec& spec, const data::Split& data,
                                 const std::vector<double>& lambdas,
                                 const std::vector<double>& thresholds, const EqlConfig& base,
                                 const train::TrainConfig& cfg);

/// Cell seed as a pure function of the master seed and the cell index.
std::uint64_t cell_seed(std::uint64_t master, std::size_t index);

}  // namespace sparsym::eql
