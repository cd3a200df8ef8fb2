#pragma once

#include <span>
#include <utility>

#include "ilmlab/data/corpus.hpp"
#include "ilmlab/ilm/context.hpp"
#include "ilmlab/model/aed.hpp"

namespace ilmlab::ilm {

// ILM scoring runs the AED decoder and readout unchanged except that every
// attention context, including the c_{i-1} fed back into the decoder, is
// replaced by ĉ_i from a ContextSource. The encoder is never consulted;
// E_x[h] receives its utterance average from the caller.

/// Tape-level bundle of the frozen AED, the optional Mini-LSTM and the
/// fixed ĉ vector (global or per-utterance average).
struct IlmGraph {
  const model::AedGraph* aed = nullptr;
  const MiniGraph* mini = nullptr;
  const ContextSource* source = nullptr;
  num::Var fixed;
};

struct IlmVars {
  model::DecoderVars decoder;
  num::Var c_prev;
  num::Var mini_h;
  num::Var mini_cell;
};

/// `utterance_average` must be set exactly when the source is E_x[h].
IlmGraph make_ilm_graph(const model::AedGraph& aed, const MiniGraph* mini, const ContextSource& source,
                        num::Var utterance_average = {});
IlmVars initial_ilm(const IlmGraph& g);
/// Consumes y_{i-1}; returns the new state and log P_ILM(. | y_1^{i-1}).
std::pair<IlmVars, num::Var> ilm_step(const IlmGraph& g, const IlmVars& state, std::size_t y_prev);
/// Teacher-forced [(J+1) x V] log-distributions for labels + </s>.
num::Var ilm_sequence_log_probs(const IlmGraph& g, std::span<const std::size_t> labels);

/// Value-level decoding state.
struct IlmState {
  model::DecoderState decoder;
  num::Tensor c_prev;
  num::Tensor mini_h;
  num::Tensor mini_cell;
  /// Per-utterance ĉ for E_x[h]; empty otherwise.
  num::Tensor utterance_average;
  std::size_t step = 0;
};

/// `enc` is required for E_x[h] and ignored by every other source.
IlmState initial_ilm_state(const model::AedModel& model, const ContextSource& source,
                           const model::EncoderOutput* enc = nullptr);
std::pair<IlmState, num::Tensor> ilm_step(const IlmState& state, std::size_t y_prev, const ContextSource& source,
                                          const model::AedModel& model);

/// log P_ILM(labels + </s>).
double ilm_sequence_logprob(std::span<const std::size_t> labels, const ContextSource& source,
                            const model::AedModel& model, const model::EncoderOutput* enc = nullptr);

/// exp of the mean per-token negative log-probability, end sentinel
/// included. The text overload rejects E_x[h], which needs acoustics.
double ilm_perplexity(const data::TextCorpus& text, const ContextSource& source, const model::AedModel& model,
                      std::size_t workers = 1);
double ilm_perplexity(const data::Corpus& corpus, const ContextSource& source, const model::AedModel& model,
                      std::size_t workers = 1);

}  // namespace ilmlab::ilm
