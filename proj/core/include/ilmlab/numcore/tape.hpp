#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ilmlab/numcore/tensor.hpp"

namespace ilmlab::num {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  bool valid() const noexcept { return tape != nullptr; }
  const Shape& shape() const;
  std::span<const double> values() const;
  std::size_t size() const { return values().size(); }
  std::size_t cols() const { return shape().back(); }
  /// Value of a single-element var.
  double item() const;
  /// Copies the current value into a standalone Tensor.
  Tensor to_tensor() const;
};

enum class OpKind : std::uint8_t {
  kLeaf,
  kMatMul,
  kAdd,
  kAddRow,
  kSub,
  kMul,
  kScale,
  kTanh,
  kSigmoid,
  kSoftmax,
  kLogSoftmax,
  kMaxout,
  kConcat,
  kSlice,
  kRow,
  kStackRows,
  kReshape,
  kSum,
  kPick,
  kCrossEntropy,
};

/// Ordered record of executed differentiable operations. A tape has a
/// single owner; separate evaluations use separate tapes.
///
/// Leaves either copy a value (constant), reference an external tensor
/// without gradient (input), or reference a trainable tensor whose grad
/// buffer receives accumulated gradients on backward (param). Referenced
/// tensors must outlive the tape.
class Tape {
 public:
  /// With recording off, backward() is unavailable and no op keeps
  /// gradient bookkeeping.
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(const Tensor& t);
  Var constant(Shape shape, std::vector<double> values);
  Var input(const Tensor& t);
  Var param(Tensor& t);

  /// Reverse-mode sweep from a single-element var. Visits nodes in exact
  /// reverse creation order and accumulates (+=) into param grads.
  void backward(Var loss);

  /// Drops every node; outstanding Vars become dangling.
  void clear();

  bool recording() const noexcept { return record_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  /// Op kinds in execution order.
  std::vector<OpKind> op_log() const;
  /// Gradient of a var after backward (empty if it received none).
  std::span<const double> grad_of(Var v) const;

  // Internal interface used by the op implementations.
  struct Node {
    OpKind kind = OpKind::kLeaf;
    bool needs_grad = false;
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    const Tensor* ref = nullptr;
    Tensor* param = nullptr;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::vector<std::uint32_t> inputs;
    std::vector<std::size_t> aux;
    double scalar = 0.0;
  };
  Node& node(std::uint32_t id) { return nodes_[id]; }
  const Node& node(std::uint32_t id) const { return nodes_[id]; }
  std::span<const double> values(std::uint32_t id) const;
  Var push(Node n);

 private:
  std::vector<Node> nodes_;
  bool record_;
};

}  // namespace ilmlab::num
