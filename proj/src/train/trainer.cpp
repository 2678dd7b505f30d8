#include "train/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "loss/regloss.hpp"
#include "train/metrics.hpp"

namespace sparsym::train {

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorCode::Config, "epochs must be >= 1");
  if (batch_size < 1) fail(ErrorCode::Config, "batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorCode::Config, "learning_rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    fail(ErrorCode::Config, "adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) fail(ErrorCode::Config, "adam epsilon must be positive");
}

std::vector<std::string> TrainHistory::columns(data::Task task) {
  return {"epoch",    "stage",    "l_error",  "l_sparse_weight", "l_sparse_input",
          "l_sparse_unary", "l_sparse_binary", "l_penalty", "total", "s_weight",
          "s_input",  "s_unary",  "s_binary", "t_weight", "t_input",
          "t_unary",  "t_binary",
          task == data::Task::Classification ? "val_accuracy" : "val_mse"};
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

// splitmix64 finalizer; used to derive independent streams from one seed.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string TrainHistory::to_csv() const {
  std::string out;
  const auto cols = columns(task);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.epoch);
    out += ',';
    out += std::to_string(r.stage);
    for (double v : {r.l_error, r.l_sparse_weight, r.l_sparse_input, r.l_sparse_unary,
                     r.l_sparse_binary, r.l_penalty, r.total, r.s_weight, r.s_input, r.s_unary,
                     r.s_binary, r.t_weight, r.t_input, r.t_unary, r.t_binary, r.val_metric}) {
      out += ',';
      append_number(out, v);
    }
    out += '\n';
  }
  return out;
}

Session::Session(net::Network net, const data::Split& data, const TrainConfig& cfg, double l05_a)
    : net_(std::move(net)),
      data_(data),
      cfg_(cfg),
      graph_(net_, net::GraphOptions{.with_loss = true, .l05_a = l05_a}),
      shuffle_stream_(mix(cfg.seed)) {
  cfg_.validate();
  if (data.train.size() == 0) fail(ErrorCode::InvalidArgument, "training split is empty");
  if (data.train.n_input() != net_.spec.input_dim || data.train.n_output() != net_.spec.output_dim) {
    fail(ErrorCode::Shape, "dataset shape does not match the network (" +
                               std::to_string(data.train.n_input()) + " inputs, " +
                               std::to_string(data.train.n_output()) + " outputs)");
  }
  history_.task = data.train.task;
}

void Session::abort(const std::string& why) {
  throw TrainingAborted(why, net_, history_);
}

HistoryRow Session::record(std::size_t epoch, int stage, double lambda) {
  HistoryRow row;
  row.epoch = epoch;
  row.stage = stage;
  try {
    graph_.run(net_, data_.train.features, &data_.train.labels);
  } catch (const Error& e) {
    abort("evaluation at epoch " + std::to_string(epoch) + " failed: " + e.what());
  }
  const auto& tape = graph_.tape();
  const double l_error = tape.value(graph_.mse).item();
  const auto report = net::sparsity(net_);
  const auto regs = loss::threshold_regs(net_);
  const auto& spec = net_.spec;
  const auto lb = net_.gating == net::Gating::Pruned
                      ? loss::total_loss(l_error, report, regs, spec.targets, spec.decay_rate)
                      : loss::LossBreakdown{l_error, 0, 0, 0, 0, l_error};
  row.l_error = lb.l_error;
  row.l_sparse_weight = lb.l_sparse_weight;
  row.l_sparse_input = lb.l_sparse_input;
  row.l_sparse_unary = lb.l_sparse_unary;
  row.l_sparse_binary = lb.l_sparse_binary;
  row.l_penalty = (lambda > 0.0 && graph_.l05.valid()) ? lambda * tape.value(graph_.l05).item() : 0.0;
  row.total = lb.total + row.l_penalty;
  row.s_weight = report.s_weight;
  row.s_input = report.s_input;
  row.s_unary = report.s_unary;
  row.s_binary = report.s_binary;
  const auto t = net::mean_thresholds(net_);
  row.t_weight = t.weight;
  row.t_input = t.input;
  row.t_unary = t.unary;
  row.t_binary = t.binary;

  const auto& val = data_.val.size() > 0 ? data_.val : data_.train;
  try {
    const Metrics m = evaluate(net_, val);
    row.val_metric = val.task == data::Task::Classification ? *m.accuracy : m.mse;
  } catch (const Error& e) {
    abort("validation at epoch " + std::to_string(epoch) + " failed: " + e.what());
  }
  history_.rows.push_back(row);
  return row;
}

void Session::step(const diff::Array& x, const diff::Array& y, double lambda) {
  auto& tape = graph_.tape();
  graph_.run(net_, x, &y);
  const double l_error = tape.value(graph_.mse).item();

  std::vector<diff::Var> outputs{graph_.mse};
  std::vector<diff::Array> seeds{diff::Array::scalar(1.0)};
  if (net_.gating == net::Gating::Pruned) {
    const auto D = loss::decay_factors(net::sparsity(net_), net_.spec.targets, net_.spec.decay_rate);
    const diff::Var regs[4] = {graph_.reg_weight, graph_.reg_input, graph_.reg_unary,
                               graph_.reg_binary};
    for (int c = 0; c < 4; ++c) {
      if (D[c] > 0.0 && regs[c].valid()) {
        outputs.push_back(regs[c]);
        seeds.push_back(diff::Array::scalar(l_error * D[c]));
      }
    }
  }
  if (lambda > 0.0 && graph_.l05.valid()) {
    outputs.push_back(graph_.l05);
    seeds.push_back(diff::Array::scalar(lambda));
  }
  const auto grads = tape.backward(outputs, seeds);
  const auto params = net::trainable_params(net_);
  adam_step(params, grads, adam_, cfg_.adam());
  net::clip_thresholds(net_);
}

void Session::run_epoch(double lambda) {
  const auto& train = data_.train;
  const std::size_t n = train.size(), fi = train.n_input(), lo = train.n_output();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::uint64_t epoch_seed = shuffle_stream_();
  if (cfg_.shuffle) {
    std::mt19937_64 rng(epoch_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  for (std::size_t start = 0; start < n; start += cfg_.batch_size) {
    const std::size_t rows = std::min(cfg_.batch_size, n - start);
    diff::Array x(diff::Shape{rows, fi});
    diff::Array y(diff::Shape{rows, lo});
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t r = order[start + i];
      std::copy_n(&train.features[r * fi], fi, &x[i * fi]);
      std::copy_n(&train.labels[r * lo], lo, &y[i * lo]);
    }
    try {
      step(x, y, lambda);
    } catch (const TrainingAborted&) {
      throw;
    } catch (const Error& e) {
      abort(std::string("training step failed: ") + e.what());
    }
  }
}

TrainResult train(net::Network net, const data::Split& data, const TrainConfig& cfg,
                  const CheckpointHook& hook) {
  Session session(std::move(net), data, cfg);
  session.record(0, 0);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    session.run_epoch();
    session.record(epoch, 0);
    if (hook && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
      hook(session.network(), epoch);
    }
  }
  return {std::move(session.network()), std::move(session.history())};
}

}  // namespace sparsym::train
