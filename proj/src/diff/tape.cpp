#include "diff/tape.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace sparsym::diff {

namespace {

void require_same_shape(const Array& a, const Array& b, const char* op) {
  if (a.shape() != b.shape()) {
    fail(ErrorCode::Shape, std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                               " vs " + shape_string(b.shape()));
  }
}

void require_matrix(const Array& a, const char* op) {
  if (a.rank() != 2) {
    fail(ErrorCode::Shape,
         std::string(op) + ": expected a matrix, got shape " + shape_string(a.shape()));
  }
}

void accumulate(Array& target, const Array& delta) {
  auto t = target.values();
  auto d = delta.values();
  for (std::size_t i = 0; i < t.size(); ++i) t[i] += d[i];
}

}  // namespace

Var Tape::push(Node node) {
  for (auto a : node.args) check_var(Var{a});
  nodes_.push_back(std::move(node));
  forwarded_ = false;
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::check_var(Var v) const {
  if (!v.valid() || v.index >= nodes_.size()) {
    fail(ErrorCode::InvalidArgument, "variable does not belong to this tape");
  }
}

const Tape::Node& Tape::node(Var v) const {
  check_var(v);
  return nodes_[v.index];
}

Var Tape::input(const std::string& name, Shape declared_shape, bool differentiable) {
  if (inputs_.count(name)) {
    fail(ErrorCode::InvalidArgument, "input '" + name + "' declared twice");
  }
  Node n{};
  n.op = Op::Input;
  n.name = name;
  n.declared = std::move(declared_shape);
  n.differentiable = differentiable;
  Var v = push(std::move(n));
  inputs_.emplace(name, v.index);
  return v;
}

Var Tape::constant(Array value) {
  Node n{};
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::apply(std::string_view primitive, Var x) {
  return apply(registry_->get(primitive), x);
}

Var Tape::apply(std::string_view primitive, Var x, Var y) {
  return apply(registry_->get(primitive), x, y);
}

Var Tape::apply(const PrimitiveHandle& primitive, Var x) {
  if (!primitive || primitive->arity != 1) {
    fail(ErrorCode::InvalidArgument, "apply(x) needs a unary primitive");
  }
  Node n{};
  n.op = Op::Apply1;
  n.args = {x.index};
  n.prims = {primitive};
  return push(std::move(n));
}

Var Tape::apply(const PrimitiveHandle& primitive, Var x, Var y) {
  if (!primitive || primitive->arity != 2) {
    fail(ErrorCode::InvalidArgument, "apply(x, y) needs a binary primitive");
  }
  Node n{};
  n.op = Op::Apply2;
  n.args = {x.index, y.index};
  n.prims = {primitive};
  return push(std::move(n));
}

Var Tape::apply_columns(Var x, const std::vector<PrimitiveHandle>& prims) {
  for (const auto& p : prims) {
    if (!p || p->arity != 1) {
      fail(ErrorCode::InvalidArgument, "apply_columns needs unary primitives");
    }
  }
  Node n{};
  n.op = Op::ApplyColumns;
  n.args = {x.index};
  n.prims = prims;
  return push(std::move(n));
}

Var Tape::apply_pairs(Var x, const std::vector<PrimitiveHandle>& prims) {
  for (const auto& p : prims) {
    if (!p || p->arity != 2) {
      fail(ErrorCode::InvalidArgument, "apply_pairs needs binary primitives");
    }
  }
  Node n{};
  n.op = Op::ApplyPairs;
  n.args = {x.index};
  n.prims = prims;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  Node n{};
  n.op = Op::Add;
  n.args = {a.index, b.index};
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  Node n{};
  n.op = Op::Sub;
  n.args = {a.index, b.index};
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  Node n{};
  n.op = Op::Mul;
  n.args = {a.index, b.index};
  return push(std::move(n));
}

Var Tape::affine(Var x, double scale, double shift) {
  Node n{};
  n.op = Op::Affine;
  n.args = {x.index};
  n.scale = scale;
  n.shift = shift;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  Node n{};
  n.op = Op::MatMul;
  n.args = {a.index, b.index};
  return push(std::move(n));
}

Var Tape::add_row(Var a, Var row) {
  Node n{};
  n.op = Op::AddRow;
  n.args = {a.index, row.index};
  return push(std::move(n));
}

Var Tape::mul_row(Var a, Var row) {
  Node n{};
  n.op = Op::MulRow;
  n.args = {a.index, row.index};
  return push(std::move(n));
}

Var Tape::slice_cols(Var a, std::size_t begin, std::size_t end) {
  if (end < begin) fail(ErrorCode::InvalidArgument, "slice_cols: end < begin");
  Node n{};
  n.op = Op::SliceCols;
  n.args = {a.index};
  n.begin = begin;
  n.end = end;
  return push(std::move(n));
}

Var Tape::concat_cols(Var a, Var b) {
  Node n{};
  n.op = Op::ConcatCols;
  n.args = {a.index, b.index};
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  Node n{};
  n.op = Op::Sum;
  n.args = {a.index};
  return push(std::move(n));
}

Var Tape::mean(Var a) {
  Node n{};
  n.op = Op::Mean;
  n.args = {a.index};
  return push(std::move(n));
}

const Array& Tape::value(Var v) const {
  if (!forwarded_) fail(ErrorCode::Runtime, "value() requested before forward()");
  return node(v).value;
}

std::size_t Tape::surrogate_count() const {
  std::size_t count = 0;
  for (const auto& n : nodes_) {
    count += static_cast<std::size_t>(
        std::count_if(n.prims.begin(), n.prims.end(),
                      [](const PrimitiveHandle& p) { return p->surrogate; }));
  }
  return count;
}

std::vector<std::string> Tape::input_names(bool differentiable_only) const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    if (n.op == Op::Input && (!differentiable_only || n.differentiable)) {
      out.push_back(n.name);
    }
  }
  return out;
}

void Tape::forward(const Bindings& bindings) {
  forwarded_ = false;
  for (auto& n : nodes_) {
    if (n.op == Op::Input) {
      auto it = bindings.find(n.name);
      if (it == bindings.end()) {
        fail(ErrorCode::InvalidArgument, "unbound variable '" + n.name + "'");
      }
      const Shape& actual = it->second.shape();
      bool ok = actual.size() == n.declared.size();
      for (std::size_t d = 0; ok && d < actual.size(); ++d) {
        ok = n.declared[d] == kAnyDim || n.declared[d] == actual[d];
      }
      if (!ok) {
        fail(ErrorCode::Shape, "binding for '" + n.name + "' has shape " +
                                   shape_string(actual) + ", expected " +
                                   shape_string(n.declared));
      }
      n.value = it->second;
    } else if (n.op != Op::Constant) {
      evaluate(n);
    }
    if (!n.value.all_finite()) {
      fail(ErrorCode::Numeric,
           "non-finite value produced at tape node " +
               std::to_string(&n - nodes_.data()) +
               (n.prims.empty() ? std::string() : " (" + n.prims.front()->name + ")"));
    }
  }
  forwarded_ = true;
}

void Tape::evaluate(Node& n) {
  auto arg = [&](std::size_t k) -> const Array& { return nodes_[n.args[k]].value; };
  switch (n.op) {
    case Op::Input:
    case Op::Constant:
      return;
    case Op::Apply1: {
      const Array& x = arg(0);
      Array out(x.shape());
      const auto& p = *n.prims[0];
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = p.forward1(x[i]);
      n.value = std::move(out);
      return;
    }
    case Op::Apply2: {
      const Array& x = arg(0);
      const Array& y = arg(1);
      require_same_shape(x, y, n.prims[0]->name.c_str());
      Array out(x.shape());
      const auto& p = *n.prims[0];
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = p.forward2(x[i], y[i]);
      n.value = std::move(out);
      return;
    }
    case Op::ApplyColumns: {
      const Array& x = arg(0);
      require_matrix(x, "apply_columns");
      const std::size_t rows = x.rows(), k = n.prims.size();
      if (x.cols() != k) {
        fail(ErrorCode::Shape, "apply_columns: " + std::to_string(x.cols()) +
                                   " columns for " + std::to_string(k) + " primitives");
      }
      Array out(Shape{rows, k});
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < k; ++j) out[r * k + j] = n.prims[j]->forward1(x[r * k + j]);
      }
      n.value = std::move(out);
      return;
    }
    case Op::ApplyPairs: {
      const Array& x = arg(0);
      require_matrix(x, "apply_pairs");
      const std::size_t rows = x.rows(), k = n.prims.size();
      if (x.cols() != 2 * k) {
        fail(ErrorCode::Shape, "apply_pairs: " + std::to_string(x.cols()) +
                                   " columns for " + std::to_string(k) + " binary primitives");
      }
      Array out(Shape{rows, k});
      for (std::size_t r = 0; r < rows; ++r) {
        const double* in = &x[r * 2 * k];
        for (std::size_t j = 0; j < k; ++j) {
          out[r * k + j] = n.prims[j]->forward2(in[2 * j], in[2 * j + 1]);
        }
      }
      n.value = std::move(out);
      return;
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul: {
      const Array& a = arg(0);
      const Array& b = arg(1);
      require_same_shape(a, b, n.op == Op::Add ? "add" : (n.op == Op::Sub ? "sub" : "mul"));
      Array out(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = n.op == Op::Add ? a[i] + b[i] : (n.op == Op::Sub ? a[i] - b[i] : a[i] * b[i]);
      }
      n.value = std::move(out);
      return;
    }
    case Op::Affine: {
      const Array& x = arg(0);
      Array out(x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = n.scale * x[i] + n.shift;
      n.value = std::move(out);
      return;
    }
    case Op::MatMul: {
      const Array& a = arg(0);
      const Array& b = arg(1);
      require_matrix(a, "matmul");
      require_matrix(b, "matmul");
      const std::size_t rows = a.rows(), inner = a.cols(), cols = b.cols();
      if (b.rows() != inner) {
        fail(ErrorCode::Shape, "matmul: inner dimensions differ " + shape_string(a.shape()) +
                                   " * " + shape_string(b.shape()));
      }
      Array out(Shape{rows, cols});
      for (std::size_t i = 0; i < rows; ++i) {
        double* o = &out[i * cols];
        for (std::size_t k = 0; k < inner; ++k) {
          const double aik = a[i * inner + k];
          if (aik == 0.0) continue;
          const double* brow = &b[k * cols];
          for (std::size_t j = 0; j < cols; ++j) o[j] += aik * brow[j];
        }
      }
      n.value = std::move(out);
      return;
    }
    case Op::AddRow:
    case Op::MulRow: {
      const Array& a = arg(0);
      const Array& row = arg(1);
      require_matrix(a, n.op == Op::AddRow ? "add_row" : "mul_row");
      const std::size_t rows = a.rows(), cols = a.cols();
      if (row.size() != cols || row.rank() != 1) {
        fail(ErrorCode::Shape, "row broadcast: " + shape_string(row.shape()) + " against " +
                                   shape_string(a.shape()));
      }
      Array out(a.shape());
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const double v = a[r * cols + c];
          out[r * cols + c] = n.op == Op::AddRow ? v + row[c] : v * row[c];
        }
      }
      n.value = std::move(out);
      return;
    }
    case Op::SliceCols: {
      const Array& a = arg(0);
      require_matrix(a, "slice_cols");
      if (n.end > a.cols()) {
        fail(ErrorCode::Shape, "slice_cols: range exceeds " + std::to_string(a.cols()) +
                                   " columns");
      }
      const std::size_t rows = a.rows(), cols = a.cols(), width = n.end - n.begin;
      Array out(Shape{rows, width});
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < width; ++c) out[r * width + c] = a[r * cols + n.begin + c];
      }
      n.value = std::move(out);
      return;
    }
    case Op::ConcatCols: {
      const Array& a = arg(0);
      const Array& b = arg(1);
      require_matrix(a, "concat_cols");
      require_matrix(b, "concat_cols");
      if (a.rows() != b.rows()) {
        fail(ErrorCode::Shape, "concat_cols: row counts differ " + shape_string(a.shape()) +
                                   " vs " + shape_string(b.shape()));
      }
      const std::size_t rows = a.rows(), ca = a.cols(), cb = b.cols(), w = ca + cb;
      Array out(Shape{rows, w});
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(&a[r * ca], ca, &out[r * w]);
        std::copy_n(&b[r * cb], cb, &out[r * w + ca]);
      }
      n.value = std::move(out);
      return;
    }
    case Op::Sum:
    case Op::Mean: {
      const Array& a = arg(0);
      double total = 0.0;
      for (double v : a.values()) total += v;
      if (n.op == Op::Mean) {
        if (a.size() == 0) fail(ErrorCode::Shape, "mean of an empty array");
        total /= static_cast<double>(a.size());
      }
      n.value = Array::scalar(total);
      return;
    }
  }
}

Gradients Tape::backward(Var output, const Array& seed, BackwardMode mode) const {
  return backward(std::span<const Var>(&output, 1), std::span<const Array>(&seed, 1), mode);
}

Gradients Tape::backward(std::span<const Var> outputs, std::span<const Array> seeds,
                         BackwardMode mode) const {
  if (!forwarded_) fail(ErrorCode::Runtime, "backward() called before forward()");
  if (outputs.size() != seeds.size()) {
    fail(ErrorCode::InvalidArgument, "backward: one seed per output required");
  }

  // Which nodes lie downstream of a differentiable input.
  const std::size_t count = nodes_.size();
  std::vector<char> live(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    const Node& n = nodes_[i];
    if (n.op == Op::Input) {
      live[i] = n.differentiable;
    } else {
      for (auto a : n.args) live[i] |= live[a];
    }
  }

  std::vector<Array> grads(count);
  std::vector<char> touched(count, 0);
  auto add_grad = [&](std::size_t i, const Array& delta) {
    if (!touched[i]) {
      grads[i] = delta;
      touched[i] = 1;
    } else {
      accumulate(grads[i], delta);
    }
  };
  std::size_t last = 0;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    const Node& out = node(outputs[k]);
    if (seeds[k].shape() != out.value.shape()) {
      fail(ErrorCode::Shape, "seed shape " + shape_string(seeds[k].shape()) +
                                 " does not match output shape " +
                                 shape_string(out.value.shape()));
    }
    add_grad(outputs[k].index, seeds[k]);
    last = std::max<std::size_t>(last, outputs[k].index);
  }

  for (std::size_t idx = last + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    if (!live[idx] || !touched[idx] || n.op == Op::Input) continue;
    const Array& g = grads[idx];
    auto arg = [&](std::size_t k) -> const Array& { return nodes_[n.args[k]].value; };
    auto wants = [&](std::size_t k) { return live[n.args[k]] != 0; };
    auto send = [&](std::size_t k, const Array& delta) { add_grad(n.args[k], delta); };

    switch (n.op) {
      case Op::Input:
      case Op::Constant:
        break;
      case Op::Apply1: {
        const auto& p = *n.prims[0];
        const Array& x = arg(0);
        Array d(x.shape());
        if (!(p.surrogate && mode == BackwardMode::SmoothOnly)) {
          for (std::size_t i = 0; i < x.size(); ++i) d[i] = g[i] * p.backward1(x[i]);
        }
        send(0, std::move(d));
        break;
      }
      case Op::Apply2: {
        const auto& p = *n.prims[0];
        const Array& x = arg(0);
        const Array& y = arg(1);
        Array dx(x.shape()), dy(y.shape());
        if (!(p.surrogate && mode == BackwardMode::SmoothOnly)) {
          for (std::size_t i = 0; i < x.size(); ++i) {
            auto [gx, gy] = p.backward2(x[i], y[i]);
            dx[i] = g[i] * gx;
            dy[i] = g[i] * gy;
          }
        }
        if (wants(0)) send(0, std::move(dx));
        if (wants(1)) send(1, std::move(dy));
        break;
      }
      case Op::ApplyColumns: {
        const Array& x = arg(0);
        const std::size_t rows = x.rows(), k = n.prims.size();
        Array d(x.shape());
        for (std::size_t j = 0; j < k; ++j) {
          const auto& p = *n.prims[j];
          if (p.surrogate && mode == BackwardMode::SmoothOnly) continue;
          for (std::size_t r = 0; r < rows; ++r) {
            d[r * k + j] = g[r * k + j] * p.backward1(x[r * k + j]);
          }
        }
        send(0, std::move(d));
        break;
      }
      case Op::ApplyPairs: {
        const Array& x = arg(0);
        const std::size_t rows = x.rows(), k = n.prims.size();
        Array d(x.shape());
        for (std::size_t j = 0; j < k; ++j) {
          const auto& p = *n.prims[j];
          if (p.surrogate && mode == BackwardMode::SmoothOnly) continue;
          for (std::size_t r = 0; r < rows; ++r) {
            const double a = x[r * 2 * k + 2 * j], b = x[r * 2 * k + 2 * j + 1];
            auto [ga, gb] = p.backward2(a, b);
            d[r * 2 * k + 2 * j] = g[r * k + j] * ga;
            d[r * 2 * k + 2 * j + 1] = g[r * k + j] * gb;
          }
        }
        send(0, std::move(d));
        break;
      }
      case Op::Add:
        if (wants(0)) send(0, g);
        if (wants(1)) send(1, g);
        break;
      case Op::Sub: {
        if (wants(0)) send(0, g);
        if (wants(1)) {
          Array d(g.shape());
          for (std::size_t i = 0; i < g.size(); ++i) d[i] = -g[i];
          send(1, std::move(d));
        }
        break;
      }
      case Op::Mul: {
        const Array& a = arg(0);
        const Array& b = arg(1);
        if (wants(0)) {
          Array d(a.shape());
          for (std::size_t i = 0; i < a.size(); ++i) d[i] = g[i] * b[i];
          send(0, std::move(d));
        }
        if (wants(1)) {
          Array d(b.shape());
          for (std::size_t i = 0; i < b.size(); ++i) d[i] = g[i] * a[i];
          send(1, std::move(d));
        }
        break;
      }
      case Op::Affine: {
        Array d(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] * n.scale;
        send(0, std::move(d));
        break;
      }
      case Op::MatMul: {
        const Array& a = arg(0);
        const Array& b = arg(1);
        const std::size_t rows = a.rows(), inner = a.cols(), cols = b.cols();
        if (wants(0)) {
          Array d(a.shape());
          for (std::size_t i = 0; i < rows; ++i) {
            const double* gi = &g[i * cols];
            for (std::size_t k = 0; k < inner; ++k) {
              const double* bk = &b[k * cols];
              double acc = 0.0;
              for (std::size_t j = 0; j < cols; ++j) acc += gi[j] * bk[j];
              d[i * inner + k] = acc;
            }
          }
          send(0, std::move(d));
        }
        if (wants(1)) {
          Array d(b.shape());
          for (std::size_t i = 0; i < rows; ++i) {
            const double* gi = &g[i * cols];
            for (std::size_t k = 0; k < inner; ++k) {
              const double aik = a[i * inner + k];
              if (aik == 0.0) continue;
              double* dk = &d[k * cols];
              for (std::size_t j = 0; j < cols; ++j) dk[j] += aik * gi[j];
            }
          }
          send(1, std::move(d));
        }
        break;
      }
      case Op::AddRow:
      case Op::MulRow: {
        const Array& a = arg(0);
        const Array& row = arg(1);
        const std::size_t rows = a.rows(), cols = a.cols();
        if (wants(0)) {
          Array d(a.shape());
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
              d[r * cols + c] = n.op == Op::AddRow ? g[r * cols + c] : g[r * cols + c] * row[c];
            }
          }
          send(0, std::move(d));
        }
        if (wants(1)) {
          Array d(row.shape());
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
              d[c] += n.op == Op::AddRow ? g[r * cols + c] : g[r * cols + c] * a[r * cols + c];
            }
          }
          send(1, std::move(d));
        }
        break;
      }
      case Op::SliceCols: {
        const Array& a = arg(0);
        const std::size_t rows = a.rows(), cols = a.cols(), width = n.end - n.begin;
        Array d(a.shape());
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < width; ++c) d[r * cols + n.begin + c] = g[r * width + c];
        }
        send(0, std::move(d));
        break;
      }
      case Op::ConcatCols: {
        const Array& a = arg(0);
        const Array& b = arg(1);
        const std::size_t rows = a.rows(), ca = a.cols(), cb = b.cols(), w = ca + cb;
        if (wants(0)) {
          Array d(a.shape());
          for (std::size_t r = 0; r < rows; ++r) std::copy_n(&g[r * w], ca, &d[r * ca]);
          send(0, d);
        }
        if (wants(1)) {
          Array d(b.shape());
          for (std::size_t r = 0; r < rows; ++r) std::copy_n(&g[r * w + ca], cb, &d[r * cb]);
          send(1, d);
        }
        break;
      }
      case Op::Sum:
      case Op::Mean: {
        const Array& a = arg(0);
        const double scale =
            n.op == Op::Mean ? g.item() / static_cast<double>(a.size()) : g.item();
        send(0, Array(a.shape(), scale));
        break;
      }
    }
  }

  Gradients out;
  for (std::size_t i = 0; i < count; ++i) {
    const Node& n = nodes_[i];
    if (n.op != Op::Input || !n.differentiable) continue;
    if (touched[i]) {
      out.emplace(n.name, grads[i]);
    } else {
      out.emplace(n.name, Array(n.value.shape(), 0.0));
    }
  }
  return out;
}

}  // namespace sparsym::diff
