#include "eql/eql.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "expr/unroll.hpp"
#include "train/metrics.hpp"

namespace sparsym::eql {

void EqlConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorCode::Config, "lambda must be >= 0");
  if (!(a > 0.0) || !std::isfinite(a)) fail(ErrorCode::Config, "a must be positive");
  if (!(hard_threshold >= 0.0)) fail(ErrorCode::Config, "hard_threshold must be >= 0");
  const bool explicit_epochs = stage_epochs[0] + stage_epochs[1] + stage_epochs[2] > 0;
  if (explicit_epochs) {
    for (auto e : stage_epochs) {
      if (e < 1) fail(ErrorCode::Config, "every stage needs at least one epoch");
    }
  } else {
    double sum = 0.0;
    for (double f : stage_fractions) {
      if (!(f > 0.0)) fail(ErrorCode::Config, "stage fractions must be positive");
      sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail(ErrorCode::Config, "stage fractions must sum to 1");
  }
}

std::array<std::size_t, 3> EqlConfig::resolve_stages(std::size_t total) const {
  if (stage_epochs[0] + stage_epochs[1] + stage_epochs[2] > 0) return stage_epochs;
  if (total < 3) fail(ErrorCode::Config, "the staged baseline needs at least 3 epochs");
  auto s1 = static_cast<std::size_t>(std::llround(stage_fractions[0] * static_cast<double>(total)));
  auto s2 = static_cast<std::size_t>(std::llround(stage_fractions[1] * static_cast<double>(total)));
  s1 = std::clamp<std::size_t>(s1, 1, total - 2);
  s2 = std::clamp<std::size_t>(s2, 1, total - 1 - s1);
  return {s1, s2, total - s1 - s2};
}

std::size_t hard_prune(net::Network& net, double threshold) {
  std::size_t count = 0;
  for (auto& layer : net.linear) {
    for (auto* t : {&layer.weight, &layer.bias}) {
      t->frozen.resize(t->weights.size(), 0);
      for (std::size_t i = 0; i < t->weights.size(); ++i) {
        if (!t->frozen[i] && std::abs(t->weights[i]) < threshold) {
          t->weights[i] = 0.0;
          t->frozen[i] = 1;
          ++count;
        }
      }
    }
  }
  return count;
}

EqlResult train_three_stage(net::Network net, const data::Split& data, const EqlConfig& eql,
                            const train::TrainConfig& cfg) {
  eql.validate();
  if (net.gating != net::Gating::Plain) {
    fail(ErrorCode::InvalidArgument, "the staged baseline trains networks without thresholds");
  }
  const auto stages = eql.resolve_stages(cfg.epochs);
  train::Session session(std::move(net), data, cfg, eql.a);
  session.record(0, 0);
  std::size_t epoch = 0;
  EqlResult result;
  for (int stage = 1; stage <= 3; ++stage) {
    const double lambda = stage == 2 ? eql.lambda : 0.0;
    if (stage == 3) {
      auto& n = session.network();
      result.pruned_at_stage3 = hard_prune(n, eql.hard_threshold);
      for (std::size_t k = 0; k < n.linear.size(); ++k) {
        const std::string p = "L" + std::to_string(k) + ".";
        train::reset_moments(session.adam(), p + "w", n.linear[k].weight.frozen);
        train::reset_moments(session.adam(), p + "b", n.linear[k].bias.frozen);
      }
    }
    for (std::size_t e = 0; e < stages[static_cast<std::size_t>(stage - 1)]; ++e) {
      session.run_epoch(lambda);
      session.record(++epoch, stage, lambda);
    }
  }
  result.net = std::move(session.network());
  result.history = std::move(session.history());
  const auto report = net::sparsity(result.net);
  result.degenerate = report.weight.pruned == report.weight.total;
  if (result.degenerate) warn("staged baseline pruned every weight; the model is constant");
  return result;
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t index) {
  std::uint64_t x = master ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<ScanPoint> scan_grid(const net::NetworkSpec& spec, const data::Split& data,
                                 const std::vector<double>& lambdas,
                                 const std::vector<double>& thresholds, const EqlConfig& base,
                                 const train::TrainConfig& cfg) {
  if (lambdas.empty() || thresholds.empty()) fail(ErrorCode::Config, "scan grid is empty");
  std::vector<ScanPoint> points;
  std::size_t index = 0;
  for (double lambda : lambdas) {
    for (double thr : thresholds) {
      ScanPoint p;
      p.lambda = lambda;
      p.hard_threshold = thr;
      p.seed = cell_seed(cfg.seed, index++);
      try {
        EqlConfig e = base;
        e.lambda = lambda;
        e.hard_threshold = thr;
        net::NetworkSpec s = spec;
        s.seed = p.seed;
        train::TrainConfig c = cfg;
        c.seed = p.seed;
        auto r = train_three_stage(net::build(s, net::Gating::Plain), data, e, c);
        const auto exprs = expr::unroll_simplified(r.net, data.test.standardization);
        for (const auto& x : exprs) p.complexity += expr::complexity(x);
        const auto m = train::evaluate(r.net, data.test);
        p.mse = m.mse;
        p.score = m.accuracy ? *m.accuracy : -m.mse;
        p.degenerate = r.degenerate;
      } catch (const Error& err) {
        p.error = err.what();
        warn("scan cell " + std::to_string(index - 1) + " failed: " + err.what());
      }
      points.push_back(std::move(p));
    }
  }
  std::stable_sort(points.begin(), points.end(), [](const ScanPoint& a, const ScanPoint& b) {
    return a.complexity < b.complexity;
  });
  return points;
}

}  // namespace sparsym::eql
