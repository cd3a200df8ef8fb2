#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ilmlab/data/vocabulary.hpp"
#include "ilmlab/model/aed.hpp"
#include "ilmlab/model/params.hpp"
#include "ilmlab/numcore/ops.hpp"

namespace ilmlab::model {

enum class LmRole { kExternal, kDecoderLike };
std::string lm_role_name(LmRole r);
LmRole parse_lm_role(const std::string& name);

/// Standalone label LM: embedding, a stack of LSTM layers (or one tanh
/// layer over the last k embeddings), and a linear output projection.
struct LmConfig {
  std::size_t vocab_size = 52;
  std::size_t embedding_dim = 16;
  std::size_t hidden = 64;
  std::size_t layers = 1;
  DecoderKind kind = DecoderKind::kLstm;
  std::size_t context_k = 3;
  LmRole role = LmRole::kExternal;
  double init_scale = 0.08;
  std::uint64_t seed = 1;

  util::KeyValues to_kv() const;
  static LmConfig from_kv(const util::KeyValues& kv);
  void validate() const;

  /// Topology copied from an AED decoder: embedding width, decoder width,
  /// decoder kind and label context.
  static LmConfig decoder_like(const AedConfig& aed, std::uint64_t seed);
};

class LanguageModel {
 public:
  LanguageModel(LmConfig config, data::Vocabulary vocab);

  const LmConfig& config() const noexcept { return config_; }
  const data::Vocabulary& vocabulary() const noexcept { return vocab_; }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }
  std::size_t vocab_size() const noexcept { return config_.vocab_size; }

 private:
  LmConfig config_;
  data::Vocabulary vocab_;
  ParamStore params_;
};

struct LmGraph {
  const LanguageModel* model = nullptr;
  num::Tape* tape = nullptr;
  num::Var embedding;
  std::vector<num::LstmWeights> layers;
  num::Var ff_weight;
  num::Var ff_bias;
  num::Var out_weight;
  num::Var out_bias;
};

LmGraph bind_trainable(num::Tape& tape, LanguageModel& lm);
LmGraph bind_frozen(num::Tape& tape, const LanguageModel& lm);

struct LmVars {
  std::vector<num::Var> h;
  std::vector<num::Var> cell;
  std::vector<std::size_t> history;
};

LmVars initial_lm(const LmGraph& g);
/// Consumes y_prev; returns the next state and the log-distribution of the
/// following label.
std::pair<LmVars, num::Var> lm_step(const LmGraph& g, const LmVars& state, std::size_t y_prev);
/// Per-step log-distributions for labels + </s>: [(J+1) x V].
num::Var lm_sequence_log_probs(const LmGraph& g, std::span<const std::size_t> labels);

struct LmState {
  std::vector<num::Tensor> h;
  std::vector<num::Tensor> cell;
  std::vector<std::size_t> history;
};

LmState initial_lm_state(const LanguageModel& lm);
std::pair<LmState, num::Tensor> lm_step(const LmState& state, std::size_t y_prev, const LanguageModel& lm);
/// log P_LM(labels + </s>).
double lm_sequence_logprob(std::span<const std::size_t> labels, const LanguageModel& lm);

}  // namespace ilmlab::model
