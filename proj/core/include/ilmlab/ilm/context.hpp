#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "ilmlab/model/aed.hpp"
#include "ilmlab/model/params.hpp"
#include "ilmlab/numcore/ops.hpp"

namespace ilmlab::ilm {

/// How the substituted context vector ĉ_i is produced.
enum class Method {
  kZero,
  kContextAverage,          ///< E_D[c]: mean attention context over training steps
  kEncoderAverage,          ///< E_D[h]: mean encoder state over training frames
  kSequenceEncoderAverage,  ///< E_x[h]: mean encoder state of the current utterance
  kMiniLstm,
};

/// "zero", "E_D[c]", "E_D[h]", "E_x[h]", "MiniLSTM".
std::string method_name(Method m);
/// Accepts the canonical names case-insensitively plus the shell-friendly
/// aliases ed-c, ed-h, ex-h and mini-lstm.
Method parse_method(const std::string& name);

struct MiniLstmConfig {
  std::size_t hidden = 50;
  double init_scale = 0.08;
  std::uint64_t seed = 1;
};

/// Small label-driven LSTM whose projected output replaces the attention
/// context. Its input is the (frozen) AED decoder embedding of y_{i-1}.
class MiniLstm {
 public:
  MiniLstm(const model::AedModel& aed, MiniLstmConfig config);

  const MiniLstmConfig& config() const noexcept { return config_; }
  std::size_t hidden() const noexcept { return config_.hidden; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  model::ParamStore& params() noexcept { return params_; }
  const model::ParamStore& params() const noexcept { return params_; }

 private:
  MiniLstmConfig config_;
  std::size_t input_dim_;
  std::size_t output_dim_;
  model::ParamStore params_;
};

struct MiniGraph {
  num::LstmWeights lstm;
  num::Var proj_w;
  num::Var proj_b;
};

MiniGraph bind_trainable(num::Tape& tape, MiniLstm& mini);
MiniGraph bind_frozen(num::Tape& tape, const MiniLstm& mini);

/// A rule for ĉ_i. Average-based sources carry their vector; the Mini-LSTM
/// source shares an immutable trained network. A source built with
/// `unresolved` stands for an estimator whose statistics are not computed
/// yet and is rejected by every scoring function.
class ContextSource {
 public:
  static ContextSource zero(std::size_t dim);
  static ContextSource context_average(num::Tensor c_hat);
  static ContextSource encoder_average(num::Tensor c_hat);
  static ContextSource sequence_encoder_average(std::size_t dim);
  static ContextSource mini_lstm(std::shared_ptr<const MiniLstm> mini);
  static ContextSource unresolved(Method method, std::size_t dim);

  Method method() const noexcept { return method_; }
  std::size_t dim() const noexcept { return dim_; }
  bool resolved() const noexcept { return resolved_; }
  /// Only E_x[h] looks at the utterance being decoded.
  bool uses_features() const noexcept { return method_ == Method::kSequenceEncoderAverage; }

  /// ĉ_0 := 0 for every method when set (the default).
  bool zero_at_step_zero() const noexcept { return zero_at_step_zero_; }
  ContextSource& set_zero_at_step_zero(bool on) {
    zero_at_step_zero_ = on;
    return *this;
  }

  /// The fixed vector of the global averages.
  const num::Tensor& average() const;
  const MiniLstm& mini() const;
  const std::shared_ptr<const MiniLstm>& mini_ptr() const noexcept { return mini_; }

  /// Throws UsageError unless resolved and of width `model_dim`.
  void require_resolved(std::size_t model_dim) const;

 private:
  ContextSource(Method m, std::size_t dim) : method_(m), dim_(dim) {}

  Method method_;
  std::size_t dim_;
  bool resolved_ = true;
  bool zero_at_step_zero_ = true;
  num::Tensor average_;
  std::shared_ptr<const MiniLstm> mini_;
};

}  // namespace ilmlab::ilm
