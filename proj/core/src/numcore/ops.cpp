#include "ilmlab/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ilmlab/util/error.hpp"

namespace ilmlab::num {

namespace {

using Node = Tape::Node;

Tape& tape_of(Var a) {
  if (!a.tape) throw UsageError("operation on an unbound var");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (!a.tape || a.tape != b.tape) throw UsageError("operands belong to different tapes");
  return *a.tape;
}

bool needs(Var v) { return v.tape->recording() && v.tape->node(v.id).needs_grad; }

std::size_t rows_of(const Shape& s) { return element_count(s) / s.back(); }

Node make(OpKind kind, Shape shape, std::vector<double> value, bool needs_grad) {
  Node n;
  n.kind = kind;
  n.shape = std::move(shape);
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  return n;
}

std::span<double> acc(Tape& t, std::uint32_t id) {
  Node& n = t.node(id);
  if (!n.needs_grad) return {};
  if (n.grad.empty()) n.grad.assign(t.values(id).size(), 0.0);
  return n.grad;
}

void softmax_rows(std::span<const double> x, std::size_t cols, std::vector<double>& out, bool log_space) {
  out.resize(x.size());
  const std::size_t rows = x.size() / cols;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    double* yr = out.data() + r * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(xr[c] - mx);
    if (log_space) {
      const double log_total = std::log(total);
      for (std::size_t c = 0; c < cols; ++c) yr[c] = xr[c] - mx - log_total;
    } else {
      for (std::size_t c = 0; c < cols; ++c) yr[c] = std::exp(xr[c] - mx) / total;
    }
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sb.size() != 2 || sa.size() > 2 || sa.back() != sb[0])
    throw DimensionError("matmul shape mismatch: " + shape_string(sa) + " x " + shape_string(sb));
  const std::size_t m = sa.size() == 1 ? 1 : sa[0];
  const std::size_t k = sa.back();
  const std::size_t n = sb[1];
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  Shape shape = sa.size() == 1 ? Shape{n} : Shape{m, n};
  Node node = make(OpKind::kMatMul, std::move(shape), std::move(out), needs(a) || needs(b));
  node.a = a.id;
  node.b = b.id;
  node.aux = {m, k, n};
  return t.push(std::move(node));
}

static Var binary_same_shape(Var a, Var b, OpKind kind, const char* name) {
  Tape& t = tape_of(a, b);
  if (a.size() != b.size() || a.cols() != b.cols())
    throw DimensionError(std::string(name) + " shape mismatch: " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    switch (kind) {
      case OpKind::kAdd: out[i] = av[i] + bv[i]; break;
      case OpKind::kSub: out[i] = av[i] - bv[i]; break;
      default: out[i] = av[i] * bv[i]; break;
    }
  }
  Node node = make(kind, a.shape(), std::move(out), needs(a) || needs(b));
  node.a = a.id;
  node.b = b.id;
  return t.push(std::move(node));
}

Var add(Var a, Var b) { return binary_same_shape(a, b, OpKind::kAdd, "add"); }
Var sub(Var a, Var b) { return binary_same_shape(a, b, OpKind::kSub, "sub"); }
Var mul(Var a, Var b) { return binary_same_shape(a, b, OpKind::kMul, "mul"); }

Var add_row(Var a, Var bias) {
  Tape& t = tape_of(a, bias);
  const std::size_t n = a.cols();
  if (bias.size() != n)
    throw DimensionError("add_row bias " + shape_string(bias.shape()) + " does not match " + shape_string(a.shape()));
  auto av = a.values();
  auto bv = bias.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i % n];
  Node node = make(OpKind::kAddRow, a.shape(), std::move(out), needs(a) || needs(bias));
  node.a = a.id;
  node.b = bias.id;
  return t.push(std::move(node));
}

Var scale(Var a, double factor) {
  Tape& t = tape_of(a);
  auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
  Node node = make(OpKind::kScale, a.shape(), std::move(out), needs(a));
  node.a = a.id;
  node.scalar = factor;
  return t.push(std::move(node));
}

Var activation(Var x, Activation kind) {
  Tape& t = tape_of(x);
  auto xv = x.values();
  std::vector<double> out(xv.size());
  if (kind == Activation::kTanh) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-xv[i]));
  }
  Node node = make(kind == Activation::kTanh ? OpKind::kTanh : OpKind::kSigmoid, x.shape(), std::move(out), needs(x));
  node.a = x.id;
  return t.push(std::move(node));
}

Var softmax(Var x) {
  Tape& t = tape_of(x);
  std::vector<double> out;
  softmax_rows(x.values(), x.cols(), out, false);
  Node node = make(OpKind::kSoftmax, x.shape(), std::move(out), needs(x));
  node.a = x.id;
  return t.push(std::move(node));
}

Var log_softmax(Var x) {
  Tape& t = tape_of(x);
  std::vector<double> out;
  softmax_rows(x.values(), x.cols(), out, true);
  Node node = make(OpKind::kLogSoftmax, x.shape(), std::move(out), needs(x));
  node.a = x.id;
  return t.push(std::move(node));
}

Var maxout(Var x) {
  Tape& t = tape_of(x);
  const std::size_t cols = x.cols();
  if (cols % 2 != 0) throw DimensionError("maxout needs an even last extent, got " + shape_string(x.shape()));
  auto xv = x.values();
  const std::size_t half = cols / 2;
  const std::size_t rows = xv.size() / cols;
  std::vector<double> out(rows * half);
  std::vector<std::size_t> arg(rows * half);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < half; ++j) {
      const std::size_t lo = r * cols + 2 * j;
      const std::size_t pick = xv[lo] >= xv[lo + 1] ? lo : lo + 1;
      out[r * half + j] = xv[pick];
      arg[r * half + j] = pick;
    }
  }
  Shape shape = x.shape();
  shape.back() = half;
  Node node = make(OpKind::kMaxout, std::move(shape), std::move(out), needs(x));
  node.a = x.id;
  node.aux = std::move(arg);
  return t.push(std::move(node));
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat of zero parts");
  Tape& t = tape_of(parts[0]);
  const std::size_t rows = rows_of(parts[0].shape());
  std::size_t total = 0;
  bool any_rank2 = false;
  bool grad = false;
  for (const Var& p : parts) {
    if (p.tape != &t) throw UsageError("concat operands belong to different tapes");
    if (rows_of(p.shape()) != rows)
      throw DimensionError("concat row mismatch: " + shape_string(parts[0].shape()) + " vs " + shape_string(p.shape()));
    total += p.cols();
    any_rank2 = any_rank2 || p.shape().size() > 1;
    grad = grad || needs(p);
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  Node node;
  for (const Var& p : parts) {
    auto pv = p.values();
    const std::size_t c = p.cols();
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(pv.data() + r * c, c, out.data() + r * total + offset);
    offset += c;
    node.inputs.push_back(p.id);
  }
  node.kind = OpKind::kConcat;
  node.shape = any_rank2 ? Shape{rows, total} : Shape{total};
  node.value = std::move(out);
  node.needs_grad = grad;
  return t.push(std::move(node));
}

Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }

Var slice(Var x, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(x);
  const std::size_t cols = x.cols();
  if (count == 0 || begin + count > cols)
    throw DimensionError("slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) + ") out of " +
                         shape_string(x.shape()));
  auto xv = x.values();
  const std::size_t rows = xv.size() / cols;
  std::vector<double> out(rows * count);
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(xv.data() + r * cols + begin, count, out.data() + r * count);
  Shape shape = x.shape();
  shape.back() = count;
  Node node = make(OpKind::kSlice, std::move(shape), std::move(out), needs(x));
  node.a = x.id;
  node.aux = {begin, count};
  return t.push(std::move(node));
}

Var row(Var x, std::size_t i) {
  Tape& t = tape_of(x);
  const Shape& s = x.shape();
  if (s.size() != 2 || i >= s[0])
    throw DimensionError("row " + std::to_string(i) + " of " + shape_string(s));
  auto xv = x.values();
  std::vector<double> out(xv.begin() + static_cast<std::ptrdiff_t>(i * s[1]),
                          xv.begin() + static_cast<std::ptrdiff_t>((i + 1) * s[1]));
  Node node = make(OpKind::kRow, Shape{s[1]}, std::move(out), needs(x));
  node.a = x.id;
  node.aux = {i};
  return t.push(std::move(node));
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw DimensionError("stack_rows of zero rows");
  Tape& t = tape_of(rows[0]);
  const std::size_t n = rows[0].size();
  std::vector<double> out;
  out.reserve(rows.size() * n);
  Node node;
  bool grad = false;
  for (const Var& r : rows) {
    if (r.tape != &t) throw UsageError("stack_rows operands belong to different tapes");
    if (r.size() != n) throw DimensionError("stack_rows width mismatch: " + shape_string(r.shape()));
    auto rv = r.values();
    out.insert(out.end(), rv.begin(), rv.end());
    node.inputs.push_back(r.id);
    grad = grad || needs(r);
  }
  node.kind = OpKind::kStackRows;
  node.shape = {rows.size(), n};
  node.value = std::move(out);
  node.needs_grad = grad;
  return t.push(std::move(node));
}

Var reshape(Var x, Shape shape) {
  Tape& t = tape_of(x);
  if (element_count(shape) != x.size())
    throw DimensionError("cannot reshape " + shape_string(x.shape()) + " to " + shape_string(shape));
  auto xv = x.values();
  Node node = make(OpKind::kReshape, std::move(shape), std::vector<double>(xv.begin(), xv.end()), needs(x));
  node.a = x.id;
  return t.push(std::move(node));
}

Var sum(Var x) {
  Tape& t = tape_of(x);
  double total = 0.0;
  for (double v : x.values()) total += v;
  Node node = make(OpKind::kSum, Shape{1}, {total}, needs(x));
  node.a = x.id;
  return t.push(std::move(node));
}

Var pick(Var x, std::size_t index) {
  Tape& t = tape_of(x);
  if (index >= x.size()) throw IndexError("pick index " + std::to_string(index) + " out of " + shape_string(x.shape()));
  Node node = make(OpKind::kPick, Shape{1}, {x.values()[index]}, needs(x));
  node.a = x.id;
  node.aux = {index};
  return t.push(std::move(node));
}

Var cross_entropy(Var logprobs, std::span<const std::size_t> targets) {
  Tape& t = tape_of(logprobs);
  const std::size_t vocab = logprobs.cols();
  const std::size_t rows = logprobs.size() / vocab;
  if (targets.size() != rows)
    throw DimensionError("cross_entropy has " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(rows) + " rows");
  auto lv = logprobs.values();
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] >= vocab)
      throw IndexError("target id " + std::to_string(targets[r]) + " out of range for vocabulary " +
                       std::to_string(vocab));
    total -= lv[r * vocab + targets[r]];
  }
  Node node = make(OpKind::kCrossEntropy, Shape{1}, {total / static_cast<double>(rows)}, needs(logprobs));
  node.a = logprobs.id;
  node.aux.assign(targets.begin(), targets.end());
  return t.push(std::move(node));
}

LstmOutput lstm_cell_projected(Var x_proj, Var h_prev, Var c_prev, const LstmWeights& w) {
  const Shape& us = w.recurrent.shape();
  const std::size_t hidden = h_prev.size();
  if (us.size() != 2 || us[0] != hidden || us[1] != 4 * hidden || x_proj.size() != 4 * hidden ||
      c_prev.size() != hidden || w.bias.size() != 4 * hidden)
    throw DimensionError("lstm_cell width mismatch: projected input " + shape_string(x_proj.shape()) + ", state " +
                         shape_string(h_prev.shape()) + ", recurrent " + shape_string(us));
  Var gates = add_row(add(x_proj, matmul(h_prev, w.recurrent)), w.bias);
  Var in_gate = sigmoid(slice(gates, 0, hidden));
  Var forget_gate = sigmoid(slice(gates, hidden, hidden));
  Var candidate = tanh(slice(gates, 2 * hidden, hidden));
  Var out_gate = sigmoid(slice(gates, 3 * hidden, hidden));
  Var cell = add(mul(forget_gate, c_prev), mul(in_gate, candidate));
  Var h = mul(out_gate, tanh(cell));
  return {h, cell};
}

LstmOutput lstm_cell(Var x, Var h_prev, Var c_prev, const LstmWeights& w) {
  const Shape& ws = w.input.shape();
  if (ws.size() != 2 || ws[0] != x.cols())
    throw DimensionError("lstm_cell input width mismatch: x " + shape_string(x.shape()) + ", weights " +
                         shape_string(ws));
  return lstm_cell_projected(matmul(x, w.input), h_prev, c_prev, w);
}

namespace detail {

void backward_node(Tape& t, std::uint32_t id) {
  // Copy out what is needed: acc() may grow other nodes' grad buffers but
  // never reallocates the node vector itself.
  const Node& n = t.node(id);
  const std::vector<double>& g = n.grad;
  switch (n.kind) {
    case OpKind::kLeaf:
      if (n.param) {
        auto dst = n.param->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
      }
      break;
    case OpKind::kMatMul: {
      const std::size_t m = n.aux[0], k = n.aux[1], cols = n.aux[2];
      auto av = t.values(n.a);
      auto bv = t.values(n.b);
      if (auto ga = acc(t, n.a); !ga.empty()) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double* brow = bv.data() + p * cols;
            const double* grow = g.data() + i * cols;
            double s = 0.0;
            for (std::size_t j = 0; j < cols; ++j) s += grow[j] * brow[j];
            ga[i * k + p] += s;
          }
      }
      if (auto gb = acc(t, n.b); !gb.empty()) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            if (aip == 0.0) continue;
            double* gbrow = gb.data() + p * cols;
            const double* grow = g.data() + i * cols;
            for (std::size_t j = 0; j < cols; ++j) gbrow[j] += aip * grow[j];
          }
      }
      break;
    }
    case OpKind::kAdd:
    case OpKind::kSub: {
      const double sign = n.kind == OpKind::kAdd ? 1.0 : -1.0;
      if (auto ga = acc(t, n.a); !ga.empty())
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      if (auto gb = acc(t, n.b); !gb.empty())
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sign * g[i];
      break;
    }
    case OpKind::kMul: {
      auto av = t.values(n.a);
      auto bv = t.values(n.b);
      if (auto ga = acc(t, n.a); !ga.empty())
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
      if (auto gb = acc(t, n.b); !gb.empty())
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
      break;
    }
    case OpKind::kAddRow: {
      if (auto ga = acc(t, n.a); !ga.empty())
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      if (auto gb = acc(t, n.b); !gb.empty()) {
        const std::size_t cols = gb.size();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i % cols] += g[i];
      }
      break;
    }
    case OpKind::kScale:
      if (auto ga = acc(t, n.a); !ga.empty())
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.scalar;
      break;
    case OpKind::kTanh:
      if (auto ga = acc(t, n.a); !ga.empty())
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
      break;
    case OpKind::kSigmoid:
      if (auto ga = acc(t, n.a); !ga.empty())
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
      break;
    case OpKind::kSoftmax:
      if (auto ga = acc(t, n.a); !ga.empty()) {
        const std::size_t cols = n.shape.back();
        for (std::size_t r = 0; r < g.size() / cols; ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * n.value[r * cols + c];
          for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += n.value[r * cols + c] * (g[r * cols + c] - dot);
        }
      }
      break;
    case OpKind::kLogSoftmax:
      if (auto ga = acc(t, n.a); !ga.empty()) {
        const std::size_t cols = n.shape.back();
        for (std::size_t r = 0; r < g.size() / cols; ++r) {
          double total = 0.0;
          for (std::size_t c = 0; c < cols; ++c) total += g[r * cols + c];
          for (std::size_t c = 0; c < cols; ++c)
            ga[r * cols + c] += g[r * cols + c] - std::exp(n.value[r * cols + c]) * total;
        }
      }
      break;
    case OpKind::kMaxout:
      if (auto ga = acc(t, n.a); !ga.empty())
        for (std::size_t i = 0; i < g.size(); ++i) ga[n.aux[i]] += g[i];
      break;
    case OpKind::kConcat: {
      const std::size_t total = n.shape.back();
      const std::size_t rows = g.size() / total;
      std::size_t offset = 0;
      for (std::uint32_t in : n.inputs) {
        const std::size_t c = t.node(in).shape.back();
        if (auto gi = acc(t, in); !gi.empty())
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < c; ++j) gi[r * c + j] += g[r * total + offset + j];
        offset += c;
      }
      break;
    }
    case OpKind::kSlice:
      if (auto ga = acc(t, n.a); !ga.empty()) {
        const std::size_t begin = n.aux[0], count = n.aux[1];
        const std::size_t cols = t.node(n.a).shape.back();
        for (std::size_t r = 0; r < g.size() / count; ++r)
          for (std::size_t j = 0; j < count; ++j) ga[r * cols + begin + j] += g[r * count + j];
      }
      break;
    case OpKind::kRow:
      if (auto ga = acc(t, n.a); !ga.empty()) {
        const std::size_t offset = n.aux[0] * g.size();
        for (std::size_t j = 0; j < g.size(); ++j) ga[offset + j] += g[j];
      }
      break;
    case OpKind::kStackRows: {
      const std::size_t width = n.shape[1];
      for (std::size_t r = 0; r < n.inputs.size(); ++r)
        if (auto gi = acc(t, n.inputs[r]); !gi.empty())
          for (std::size_t j = 0; j < width; ++j) gi[j] += g[r * width + j];
      break;
    }
    case OpKind::kReshape:
      if (auto ga = acc(t, n.a); !ga.empty())
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      break;
    case OpKind::kSum:
      if (auto ga = acc(t, n.a); !ga.empty())
        for (double& v : ga) v += g[0];
      break;
    case OpKind::kPick:
      if (auto ga = acc(t, n.a); !ga.empty()) ga[n.aux[0]] += g[0];
      break;
    case OpKind::kCrossEntropy:
      if (auto ga = acc(t, n.a); !ga.empty()) {
        const std::size_t rows = n.aux.size();
        const std::size_t vocab = ga.size() / rows;
        const double w = -g[0] / static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r) ga[r * vocab + n.aux[r]] += w;
      }
      break;
  }
}

}  // namespace detail

}  // namespace ilmlab::num
