#include "data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "common/error.hpp"

namespace sparsym::data {

const char* to_string(Task task) {
  return task == Task::Classification ? "classification" : "regression";
}

Task parse_task(const std::string& name) {
  if (name == "classification") return Task::Classification;
  if (name == "regression") return Task::Regression;
  fail(ErrorCode::Config, "unknown task '" + name + "' (expected classification or regression)");
}

void Dataset::validate() const {
  if (features.rank() != 2 || labels.rank() != 2) {
    fail(ErrorCode::Shape, "dataset features and labels must be matrices");
  }
  if (features.rows() == 0) fail(ErrorCode::InvalidArgument, "dataset is empty");
  if (features.rows() != labels.rows()) {
    fail(ErrorCode::Shape, "dataset has " + std::to_string(features.rows()) +
                               " feature rows but " + std::to_string(labels.rows()) +
                               " label rows");
  }
  if (!feature_names.empty() && feature_names.size() != features.cols()) {
    fail(ErrorCode::Shape, "feature name count does not match feature columns");
  }
  if (!features.all_finite() || !labels.all_finite()) {
    fail(ErrorCode::Numeric, "dataset contains NaN or infinite values");
  }
  if (task == Task::Classification && labels.cols() > 1) {
    for (std::size_t r = 0; r < labels.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < labels.cols(); ++c) {
        const double v = labels.at(r, c);
        if (v != 0.0 && v != 1.0) {
          fail(ErrorCode::InvalidArgument, "classification label row " + std::to_string(r + 1) +
                                               " is not one-hot");
        }
        sum += v;
      }
      if (sum != 1.0) {
        fail(ErrorCode::InvalidArgument,
             "classification label row " + std::to_string(r + 1) + " is not one-hot");
      }
    }
  }
}

Dataset select_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.feature_names = ds.feature_names;
  out.task = ds.task;
  out.standardization = ds.standardization;
  const std::size_t fi = ds.n_input(), lo = ds.n_output();
  out.features = Array(diff::Shape{rows.size(), fi});
  out.labels = Array(diff::Shape{rows.size(), lo});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    if (r >= ds.size()) fail(ErrorCode::InvalidArgument, "row index out of range");
    std::copy_n(&ds.features[r * fi], fi, &out.features[i * fi]);
    std::copy_n(&ds.labels[r * lo], lo, &out.labels[i * lo]);
  }
  return out;
}

Split split(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (n < 3) fail(ErrorCode::InvalidArgument, "need at least 3 samples to split, got " + std::to_string(n));
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    fail(ErrorCode::Config, "split ratios must be nonnegative and sum to 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_val = static_cast<std::size_t>(std::llround(ratios.val * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(std::llround(ratios.test * static_cast<double>(n)));
  if (n_val + n_test >= n) fail(ErrorCode::InvalidArgument, "split leaves no training rows");

  Split s;
  s.train_rows.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val + n_test));
  s.val_rows.assign(order.end() - static_cast<std::ptrdiff_t>(n_val + n_test),
                    order.end() - static_cast<std::ptrdiff_t>(n_test));
  s.test_rows.assign(order.end() - static_cast<std::ptrdiff_t>(n_test), order.end());
  s.train = select_rows(ds, s.train_rows);
  s.val = select_rows(ds, s.val_rows);
  s.test = select_rows(ds, s.test_rows);
  return s;
}

Standardization fit_standardization(const Dataset& train) {
  const std::size_t n = train.size(), f = train.n_input();
  if (n == 0) fail(ErrorCode::InvalidArgument, "cannot standardize an empty split");
  Standardization st;
  st.mean.assign(f, 0.0);
  st.stddev.assign(f, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < f; ++c) st.mean[c] += train.features[r * f + c];
  }
  for (auto& m : st.mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < f; ++c) {
      const double d = train.features[r * f + c] - st.mean[c];
      st.stddev[c] += d * d;
    }
  }
  for (auto& s : st.stddev) s = std::sqrt(s / static_cast<double>(n));
  return st;
}

Dataset apply_standardization(const Dataset& ds, const Standardization& st) {
  const std::size_t f = ds.n_input();
  if (st.mean.size() != f || st.stddev.size() != f) {
    fail(ErrorCode::Shape, "standardization statistics do not match the feature count");
  }
  Dataset out = ds;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t c = 0; c < f; ++c) {
      double& v = out.features[r * f + c];
      v = st.stddev[c] > 0.0 ? (v - st.mean[c]) / st.stddev[c] : 0.0;
    }
  }
  out.standardization = st;
  return out;
}

void standardize(Split& split) {
  Standardization st = fit_standardization(split.train);
  for (std::size_t c = 0; c < st.stddev.size(); ++c) {
    if (st.stddev[c] == 0.0) {
      std::string name = split.train.feature_names.empty() ? "x" + std::to_string(c)
                                                           : split.train.feature_names[c];
      warn("feature " + name + " is constant on the training split; standardized to 0");
    }
  }
  split.train = apply_standardization(split.train, st);
  split.val = apply_standardization(split.val, st);
  split.test = apply_standardization(split.test, st);
}

}  // namespace sparsym::data
