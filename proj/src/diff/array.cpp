#include "diff/array.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "common/error.hpp"

namespace sparsym::diff {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Array::Array(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Array::Array(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    fail(ErrorCode::Shape, "array data length " + std::to_string(data_.size()) +
                               " does not match shape " + shape_string(shape_));
  }
}

Array Array::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Array(Shape{n}, std::move(values));
}

Array Array::matrix(std::size_t rows, std::size_t cols,
                    std::initializer_list<double> values) {
  return Array(Shape{rows, cols}, std::vector<double>(values));
}

std::size_t Array::rows() const noexcept {
  if (shape_.size() == 2) return shape_[0];
  return 1;
}

std::size_t Array::cols() const noexcept {
  if (shape_.size() == 2) return shape_[1];
  if (shape_.size() == 1) return shape_[0];
  return 1;
}

double Array::item() const {
  if (data_.size() != 1) {
    fail(ErrorCode::Shape, "item() on array of shape " + shape_string(shape_));
  }
  return data_[0];
}

void Array::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Array::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace sparsym::diff
