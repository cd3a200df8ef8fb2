#include "ilmlab/numcore/tape.hpp"

#include "ilmlab/util/error.hpp"

namespace ilmlab::num {

namespace detail {
void backward_node(Tape& tape, std::uint32_t id);
}

const Shape& Var::shape() const { return tape->node(id).shape; }
std::span<const double> Var::values() const { return tape->values(id); }

double Var::item() const {
  auto v = values();
  if (v.size() != 1) throw DimensionError("item() on a var of shape " + shape_string(shape()));
  return v[0];
}

Tensor Var::to_tensor() const {
  auto v = values();
  return Tensor(shape(), std::vector<double>(v.begin(), v.end()));
}

std::span<const double> Tape::values(std::uint32_t id) const {
  const Node& n = nodes_[id];
  if (n.ref) return n.ref->values();
  if (n.param) return n.param->values();
  return n.value;
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(const Tensor& t) {
  Node n;
  n.shape = t.shape();
  n.value.assign(t.values().begin(), t.values().end());
  return push(std::move(n));
}

Var Tape::constant(Shape shape, std::vector<double> values) {
  if (element_count(shape) != values.size())
    throw DimensionError("constant of shape " + shape_string(shape) + " given " + std::to_string(values.size()) +
                         " values");
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(values);
  return push(std::move(n));
}

Var Tape::input(const Tensor& t) {
  Node n;
  n.shape = t.shape();
  n.ref = &t;
  return push(std::move(n));
}

Var Tape::param(Tensor& t) {
  Node n;
  n.shape = t.shape();
  n.param = &t;
  n.needs_grad = record_ && t.requires_grad();
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  if (!record_) throw UsageError("backward() on a tape created without recording");
  if (loss.tape != this) throw UsageError("backward() called with a var from another tape");
  Node& root = nodes_[loss.id];
  if (root.value.size() != 1 && !(root.ref || root.param))
    throw DimensionError("backward() needs a single-element loss, got " + shape_string(root.shape));
  if (!root.needs_grad) return;
  root.grad.assign(1, 1.0);
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.empty()) continue;
    detail::backward_node(*this, id);
  }
}

void Tape::clear() { nodes_.clear(); }

std::vector<OpKind> Tape::op_log() const {
  std::vector<OpKind> log;
  log.reserve(nodes_.size());
  for (const auto& n : nodes_) log.push_back(n.kind);
  return log;
}

std::span<const double> Tape::grad_of(Var v) const { return nodes_[v.id].grad; }

}  // namespace ilmlab::num
