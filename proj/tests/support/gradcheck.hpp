#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ilmlab/numcore/ops.hpp"

namespace ilmlab::testing {

/// |a - b| relative to the larger magnitude; magnitudes below `floor` are
/// compared absolutely.
double relative_error(double analytic, double numeric, double floor = 1e-4);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

using BuildFn = std::function<num::Var(num::Tape&, const std::vector<num::Var>&)>;

/// Treats every input as a parameter, reduces the output to a scalar with a
/// fixed random projection, and compares backward() against central
/// differences on every input element.
GradCheckResult check_gradients(std::vector<num::Tensor> inputs, const BuildFn& f, std::uint64_t seed,
                                double eps = 1e-5);

using LossFn = std::function<num::Var(num::Tape&)>;

/// Same comparison for a scalar loss over existing parameter tensors, which
/// `f` binds itself. At most `max_per_tensor` seeded elements of each tensor
/// are perturbed.
GradCheckResult check_param_gradients(const std::vector<num::Tensor*>& params, const LossFn& f,
                                      std::size_t max_per_tensor, std::uint64_t seed, double eps = 1e-5);

}  // namespace ilmlab::testing
