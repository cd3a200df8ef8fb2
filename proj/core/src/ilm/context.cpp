#include "ilmlab/ilm/context.hpp"

#include <algorithm>
#include <cctype>

#include "ilmlab/util/error.hpp"

namespace ilmlab::ilm {

std::string method_name(Method m) {
  switch (m) {
    case Method::kZero: return "zero";
    case Method::kContextAverage: return "E_D[c]";
    case Method::kEncoderAverage: return "E_D[h]";
    case Method::kSequenceEncoderAverage: return "E_x[h]";
    case Method::kMiniLstm: return "MiniLSTM";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (s == "zero") return Method::kZero;
  if (s == "e_d[c]" || s == "ed-c") return Method::kContextAverage;
  if (s == "e_d[h]" || s == "ed-h") return Method::kEncoderAverage;
  if (s == "e_x[h]" || s == "ex-h") return Method::kSequenceEncoderAverage;
  if (s == "minilstm" || s == "mini-lstm") return Method::kMiniLstm;
  throw ConfigError("unknown ILM estimation method '" + name + "'");
}

MiniLstm::MiniLstm(const model::AedModel& aed, MiniLstmConfig config)
    : config_(config), input_dim_(aed.config().embedding_dim), output_dim_(aed.encoder_dim()) {
  if (config_.hidden == 0) throw ConfigError("Mini-LSTM needs at least one hidden unit");
  util::Rng rng(config_.seed);
  const std::size_t h = config_.hidden;
  const double s = config_.init_scale;
  params_.create("mini.W_in", {input_dim_, 4 * h}, rng, s);
  params_.create("mini.W_rec", {h, 4 * h}, rng, s);
  params_.create("mini.bias", {4 * h}, rng, s);
  params_.create("mini.proj.W", {h, output_dim_}, rng, s);
  params_.create("mini.proj.b", {output_dim_}, rng, s);
}

namespace {

template <typename Mini, typename BindFn>
MiniGraph bind_with(Mini& mini, BindFn bind) {
  auto& p = mini.params();
  return {{bind(p.get("mini.W_in")), bind(p.get("mini.W_rec")), bind(p.get("mini.bias"))},
          bind(p.get("mini.proj.W")),
          bind(p.get("mini.proj.b"))};
}

}  // namespace

MiniGraph bind_trainable(num::Tape& tape, MiniLstm& mini) {
  return bind_with(mini, [&](num::Tensor& t) { return tape.param(t); });
}

MiniGraph bind_frozen(num::Tape& tape, const MiniLstm& mini) {
  return bind_with(mini, [&](const num::Tensor& t) { return tape.input(t); });
}

ContextSource ContextSource::zero(std::size_t dim) { return ContextSource(Method::kZero, dim); }

ContextSource ContextSource::context_average(num::Tensor c_hat) {
  ContextSource s(Method::kContextAverage, c_hat.size());
  s.average_ = std::move(c_hat);
  return s;
}

ContextSource ContextSource::encoder_average(num::Tensor c_hat) {
  ContextSource s(Method::kEncoderAverage, c_hat.size());
  s.average_ = std::move(c_hat);
  return s;
}

ContextSource ContextSource::sequence_encoder_average(std::size_t dim) {
  return ContextSource(Method::kSequenceEncoderAverage, dim);
}

ContextSource ContextSource::mini_lstm(std::shared_ptr<const MiniLstm> mini) {
  if (!mini) throw UsageError("Mini-LSTM context source needs a network");
  ContextSource s(Method::kMiniLstm, mini->output_dim());
  s.mini_ = std::move(mini);
  return s;
}

ContextSource ContextSource::unresolved(Method method, std::size_t dim) {
  ContextSource s(method, dim);
  s.resolved_ = false;
  return s;
}

const num::Tensor& ContextSource::average() const {
  if (method_ != Method::kContextAverage && method_ != Method::kEncoderAverage)
    throw UsageError("context source " + method_name(method_) + " has no fixed average vector");
  return average_;
}

const MiniLstm& ContextSource::mini() const {
  if (!mini_) throw UsageError("context source " + method_name(method_) + " has no Mini-LSTM");
  return *mini_;
}

void ContextSource::require_resolved(std::size_t model_dim) const {
  if (!resolved_) throw UsageError("ILM context source " + method_name(method_) + " is not resolved yet");
  if (dim_ != model_dim)
    throw UsageError("ILM context source width " + std::to_string(dim_) + " does not match encoder width " +
                     std::to_string(model_dim));
}

}  // namespace ilmlab::ilm
