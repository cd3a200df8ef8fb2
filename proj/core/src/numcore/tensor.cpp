#include "ilmlab/numcore/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "ilmlab/util/error.hpp"

namespace ilmlab::num {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : shape_(std::move(shape)), values_(std::move(values)), requires_grad_(requires_grad) {
  if (shape_.empty()) throw DimensionError("tensor shape must have at least one extent");
  for (auto d : shape_)
    if (d == 0) throw DimensionError("tensor extents must be positive, got " + shape_string(shape_));
  if (element_count(shape_) != values_.size())
    throw DimensionError("tensor of shape " + shape_string(shape_) + " needs " +
                         std::to_string(element_count(shape_)) + " values, got " + std::to_string(values_.size()));
  validate_finite(*this, "tensor");
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return filled(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  const std::size_t n = element_count(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

std::span<double> Tensor::grad_buffer() {
  if (grad_.empty()) grad_.assign(values_.size(), 0.0);
  return grad_;
}

void Tensor::zero_grad() {
  if (!grad_.empty()) std::fill(grad_.begin(), grad_.end(), 0.0);
}

bool Tensor::is_valid() const noexcept {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(values_.begin(), values_.end(), finite) && std::all_of(grad_.begin(), grad_.end(), finite);
}

void validate_finite(const Tensor& t, const std::string& what) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!std::isfinite(t[i])) throw InputError(what + " contains a non-finite value at index " + std::to_string(i));
}

}  // namespace ilmlab::num
