#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ilmlab/data/vocabulary.hpp"
#include "ilmlab/model/params.hpp"
#include "ilmlab/numcore/ops.hpp"
#include "ilmlab/util/kv.hpp"

namespace ilmlab::model {

enum class DecoderKind { kLstm, kFeedForward };

std::string decoder_kind_name(DecoderKind k);
DecoderKind parse_decoder_kind(const std::string& name);

/// Topology of the attention encoder-decoder.
struct AedConfig {
  std::size_t vocab_size = 52;
  std::size_t feature_dim = 16;
  std::size_t encoder_layers = 1;
  /// Units per direction; the encoder output width is twice this.
  std::size_t encoder_width = 32;
  /// Frames kept after the first encoder layer: every subsample-th one.
  std::size_t subsample = 1;
  std::size_t embedding_dim = 16;
  std::size_t attention_dim = 32;
  DecoderKind decoder = DecoderKind::kLstm;
  std::size_t decoder_width = 64;
  /// Label context of the feed-forward decoder.
  std::size_t context_k = 3;
  /// Width after maxout; the first readout layer produces twice this.
  std::size_t readout_dim = 64;
  double init_scale = 0.08;
  std::uint64_t seed = 1;

  std::size_t encoder_dim() const noexcept { return 2 * encoder_width; }
  util::KeyValues to_kv() const;
  static AedConfig from_kv(const util::KeyValues& kv);
  void validate() const;
};

class AedModel {
 public:
  AedModel(AedConfig config, data::Vocabulary vocab);

  const AedConfig& config() const noexcept { return config_; }
  const data::Vocabulary& vocabulary() const noexcept { return vocab_; }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }
  std::size_t vocab_size() const noexcept { return config_.vocab_size; }
  std::size_t encoder_dim() const noexcept { return config_.encoder_dim(); }

 private:
  AedConfig config_;
  data::Vocabulary vocab_;
  ParamStore params_;
};

// ---------------------------------------------------------------------------
// Graph-level interface: the model math recorded on a tape. Training and the
// ILM estimators build on these; the value-level functions further below wrap
// them with a non-recording tape.

/// Model parameters bound as leaves of one tape.
struct AedGraph {
  struct EncoderLayer {
    num::LstmWeights forward;
    num::LstmWeights backward;
  };

  const AedModel* model = nullptr;
  num::Tape* tape = nullptr;
  std::vector<EncoderLayer> encoder;
  num::Var att_enc;
  num::Var att_query;
  num::Var att_bias;
  num::Var att_v;
  num::Var att_gain;
  num::Var embedding;
  num::LstmWeights dec_lstm;
  num::Var ff_weight;
  num::Var ff_bias;
  num::Var readout_in_w;
  num::Var readout_in_b;
  num::Var readout_out_w;
  num::Var readout_out_b;
};

/// Parameters receive gradients.
AedGraph bind_trainable(num::Tape& tape, AedModel& model);
/// Parameters are referenced without gradients.
AedGraph bind_frozen(num::Tape& tape, const AedModel& model);

/// Encoder states [T x D_enc] for features [T' x D_in].
num::Var encode(const AedGraph& g, num::Var features);
/// Encoder states projected into the attention space, [T x A].
num::Var attention_keys(const AedGraph& g, num::Var enc);

struct AttentionVars {
  num::Var alpha;
  num::Var beta;  ///< beta + alpha, fed to the next step
  num::Var context;
};

/// Additive attention with location feedback:
///   e_t = v . tanh(W_enc h_t + W_query s + b) + gain * beta_t
///   alpha = softmax(e),  c = sum_t alpha_t h_t.
AttentionVars attend(const AedGraph& g, num::Var enc, num::Var keys, num::Var query, num::Var beta);

/// Decoder state at step i. For the LSTM decoder `s` and `cell` are the
/// recurrent state; for the FF decoder `history` holds the last k labels
/// consumed and `s` the latest output.
struct DecoderVars {
  DecoderKind kind = DecoderKind::kLstm;
  num::Var s;
  num::Var cell;
  std::vector<std::size_t> history;
};

DecoderVars initial_decoder(const AedGraph& g);
/// One decoder step consuming y_{i-1} and c_{i-1}; dispatches on the
/// decoder kind.
DecoderVars decoder_step(const AedGraph& g, const DecoderVars& prev, std::size_t y_prev, num::Var c_prev);
/// s_i = tanh(W [emb(y_{i-k}) .. emb(y_{i-1}), c_{i-1}] + b).
num::Var ff_decoder_output(const AedGraph& g, std::span<const std::size_t> history, num::Var c_prev);
/// linear -> maxout -> linear -> log_softmax over the vocabulary.
num::Var readout(const AedGraph& g, num::Var s, std::size_t y_prev, num::Var context);

/// Teacher-forced per-step log-distributions, one row per label plus the
/// end sentinel: [(J+1) x V].
num::Var sequence_log_probs(const AedGraph& g, num::Var features, std::span<const std::size_t> labels);

// ---------------------------------------------------------------------------
// Value-level interface.

struct EncoderOutput {
  num::Tensor h;  ///< [T x D_enc]
  std::size_t frames() const { return h.rows(); }
};

struct AttentionState {
  num::Tensor alpha;
  num::Tensor beta;
  num::Tensor context;
};

struct DecoderState {
  DecoderKind kind = DecoderKind::kLstm;
  num::Tensor s;
  num::Tensor cell;
  std::vector<std::size_t> history;
  std::size_t step = 0;
};

EncoderOutput encode(const num::Tensor& features, const AedModel& model);
AttentionState attend(const num::Tensor& query, const num::Tensor& beta, const EncoderOutput& enc,
                      const AedModel& model);
DecoderState initial_decoder_state(const AedModel& model);
DecoderState decoder_step_lstm(const DecoderState& state, std::size_t y_prev, const num::Tensor& c_prev,
                               const AedModel& model);
/// `history` lists y_{i-k} .. y_{i-1}; the result depends on nothing else.
DecoderState decoder_step_ff(std::span<const std::size_t> history, const num::Tensor& c_prev, const AedModel& model);
/// Advances either decoder kind by one label.
DecoderState decoder_step(const DecoderState& state, std::size_t y_prev, const num::Tensor& c_prev,
                          const AedModel& model);
num::Tensor readout(const num::Tensor& s, std::size_t y_prev, const num::Tensor& context, const AedModel& model);

/// log P_AED(labels + </s> | features), teacher-forced.
double aed_sequence_logprob(const num::Tensor& features, std::span<const std::size_t> labels, const AedModel& model);

/// Throws IndexError unless every id is an ordinary label of the model.
void check_labels(std::span<const std::size_t> labels, std::size_t vocab_size);

/// Content hash of the model's checkpoint encoding.
std::string model_hash(const AedModel& model);

}  // namespace ilmlab::model
