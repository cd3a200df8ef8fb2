#include "ilmlab/numcore/optimizer.hpp"

#include <cmath>

namespace ilmlab::num {

Adam::Adam(std::vector<Tensor*> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  for (Tensor* p : params_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

double Adam::grad_norm() const {
  double sq = 0.0;
  for (const Tensor* p : params_)
    for (double g : p->grad()) sq += g * g;
  return std::sqrt(sq);
}

void Adam::step() {
  ++t_;
  double clip = 1.0;
  if (config_.clip_norm > 0.0) {
    const double norm = grad_norm();
    if (norm > config_.clip_norm) clip = config_.clip_norm / norm;
  }
  if (config_.learning_rate != 0.0) {
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Tensor& p = *params_[k];
      if (!p.has_grad()) continue;
      auto values = p.mutable_values();
      auto grad = p.grad();
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double g = grad[i] * clip;
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
        values[i] -= config_.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config_.epsilon);
      }
    }
  }
  zero_grad();
}

void Adam::zero_grad() {
  for (Tensor* p : params_) p->zero_grad();
}

}  // namespace ilmlab::num
