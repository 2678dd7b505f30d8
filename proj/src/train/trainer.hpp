#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "data/dataset.hpp"
#include "net/graph.hpp"
#include "net/network.hpp"
#include "train/adam.hpp"

namespace sparsym::train {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 1024;
  double learning_rate = 0.0015;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  bool shuffle = true;
  // Checkpoint hook cadence in epochs; 0 disables it.
  std::size_t checkpoint_every = 0;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

// One record per epoch, plus record 0 taken before the first update. Loss
// terms are evaluated on the whole training split with the parameters at the
// end of the epoch; the metric on the validation split.
struct HistoryRow {
  std::size_t epoch = 0;
  int stage = 0;  // 0 for single-phase training; 1..3 for the staged baseline
  double l_error = 0.0;
  double l_sparse_weight = 0.0, l_sparse_input = 0.0, l_sparse_unary = 0.0, l_sparse_binary = 0.0;
  double l_penalty = 0.0;  // lambda * L0.5 (baseline stage 2)
  double total = 0.0;
  double s_weight = 0.0, s_input = 0.0, s_unary = 0.0, s_binary = 0.0;
  double t_weight = 0.0, t_input = 0.0, t_unary = 0.0, t_binary = 0.0;
  double val_metric = 0.0;  // accuracy (classification) or mse (regression)

  friend bool operator==(const HistoryRow&, const HistoryRow&) = default;
};

struct TrainHistory {
  data::Task task = data::Task::Regression;
  std::vector<HistoryRow> rows;

  static std::vector<std::string> columns(data::Task task);
  /// Header plus one line per row; doubles in shortest round-trip form.
  std::string to_csv() const;
};

struct TrainResult {
  net::Network net;
  TrainHistory history;
};

/// A failed step. Carries the network as it was before that step.
class TrainingAborted : public Error {
 public:
  TrainingAborted(const std::string& message, net::Network last_good, TrainHistory history)
      : Error(ErrorCode::Runtime, message),
        last_good_(std::make_shared<net::Network>(std::move(last_good))),
        history_(std::make_shared<TrainHistory>(std::move(history))) {}
  const net::Network& last_good() const { return *last_good_; }
  const TrainHistory& history() const { return *history_; }

 private:
  std::shared_ptr<net::Network> last_good_;
  std::shared_ptr<TrainHistory> history_;
};

using CheckpointHook = std::function<void(const net::Network&, std::size_t epoch)>;

/// Mini-batch Adam on MSE plus the four decay-scaled threshold
/// regularizers. Per step: masked forward, sparsity of the pre-update
/// parameters, backward with the l_error * D coefficients as constant seeds,
/// Adam, threshold clipping. Plain networks train on MSE alone.
TrainResult train(net::Network net, const data::Split& data, const TrainConfig& cfg,
                  const CheckpointHook& hook = {});

/// The loop shared by train() and the staged baseline.
class Session {
 public:
  Session(net::Network net, const data::Split& data, const TrainConfig& cfg, double l05_a = 0.0);

  /// Loss terms and metric at the current parameters.
  HistoryRow record(std::size_t epoch, int stage, double lambda = 0.0);
  /// One shuffled pass over the training split; `lambda` scales L0.5.
  void run_epoch(double lambda = 0.0);

  net::Network& network() { return net_; }
  AdamState& adam() { return adam_; }
  TrainHistory& history() { return history_; }
  [[noreturn]] void abort(const std::string& why);

 private:
  void step(const diff::Array& x, const diff::Array& y, double lambda);

  net::Network net_;
  const data::Split& data_;
  TrainConfig cfg_;
  net::ForwardGraph graph_;
  AdamState adam_;
  TrainHistory history_;
  std::mt19937_64 shuffle_stream_;
};

}  // namespace sparsym::train
