#pragma once

#include <vector>

#include "ilmlab/numcore/tensor.hpp"

namespace ilmlab::num {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global gradient-norm clipping threshold; 0 disables.
  double clip_norm = 0.0;
};

/// Adam over a fixed set of tensors. step() consumes and then zeroes the
/// accumulated gradients.
class Adam {
 public:
  Adam(std::vector<Tensor*> params, AdamConfig config);

  void step();
  void zero_grad();
  /// L2 norm of the current accumulated gradient over all parameters.
  double grad_norm() const;
  long steps_taken() const noexcept { return t_; }

 private:
  std::vector<Tensor*> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long t_ = 0;
};

}  // namespace ilmlab::num
