#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ilmlab::num {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major float64 array, optionally carrying a gradient buffer of
/// the same shape. Construction rejects non-finite values.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t rank() const noexcept { return shape_.size(); }
  /// Extent of the last axis.
  std::size_t cols() const noexcept { return shape_.empty() ? 0 : shape_.back(); }
  /// Product of all but the last extent.
  std::size_t rows() const noexcept { return cols() == 0 ? 0 : values_.size() / cols(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> mutable_values() noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  bool requires_grad() const noexcept { return requires_grad_; }
  void set_requires_grad(bool on) noexcept { requires_grad_ = on; }
  bool has_grad() const noexcept { return !grad_.empty(); }
  std::span<const double> grad() const noexcept { return grad_; }
  /// Allocates a zeroed gradient buffer on first use.
  std::span<double> grad_buffer();
  void zero_grad();
  void clear_grad() { grad_.clear(); }

  /// True when every value (and gradient, if present) is finite.
  bool is_valid() const noexcept;

  bool operator==(const Tensor& other) const noexcept {
    return shape_ == other.shape_ && values_ == other.values_;
  }

 private:
  Shape shape_;
  std::vector<double> values_;
  std::vector<double> grad_;
  bool requires_grad_ = false;
};

/// Throws InputError if any value is NaN or infinite.
void validate_finite(const Tensor& t, const std::string& what);

}  // namespace ilmlab::num
