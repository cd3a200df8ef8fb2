#include "ilmlab/ilm/scoring.hpp"

#include <cmath>

#include "ilmlab/ilm/stats.hpp"
#include "ilmlab/util/error.hpp"
#include "ilmlab/util/parallel.hpp"

namespace ilmlab::ilm {

using num::Var;

namespace {

Var zeros(num::Tape& tape, std::size_t n) { return tape.constant({n}, std::vector<double>(n, 0.0)); }

Var mini_output(const MiniGraph& m, Var h) { return num::add(num::matmul(h, m.proj_w), m.proj_b); }

}  // namespace

IlmGraph make_ilm_graph(const model::AedGraph& aed, const MiniGraph* mini, const ContextSource& source,
                        Var utterance_average) {
  source.require_resolved(aed.model->encoder_dim());
  IlmGraph g;
  g.aed = &aed;
  g.source = &source;
  switch (source.method()) {
    case Method::kZero: g.fixed = zeros(*aed.tape, source.dim()); break;
    case Method::kContextAverage:
    case Method::kEncoderAverage: g.fixed = aed.tape->input(source.average()); break;
    case Method::kSequenceEncoderAverage:
      if (!utterance_average.valid()) throw UsageError("E_x[h] scoring needs the utterance's encoder average");
      if (utterance_average.size() != source.dim()) throw DimensionError("utterance average has the wrong width");
      g.fixed = utterance_average;
      break;
    case Method::kMiniLstm:
      if (mini == nullptr) throw UsageError("Mini-LSTM scoring needs the bound Mini-LSTM");
      g.mini = mini;
      break;
  }
  return g;
}

IlmVars initial_ilm(const IlmGraph& g) {
  num::Tape& tape = *g.aed->tape;
  IlmVars st;
  st.decoder = model::initial_decoder(*g.aed);
  if (g.mini != nullptr) {
    const std::size_t h = g.source->mini().hidden();
    st.mini_h = zeros(tape, h);
    st.mini_cell = zeros(tape, h);
  }
  if (g.source->zero_at_step_zero())
    st.c_prev = zeros(tape, g.source->dim());
  else if (g.mini != nullptr)
    st.c_prev = mini_output(*g.mini, st.mini_h);
  else
    st.c_prev = g.fixed;
  return st;
}

std::pair<IlmVars, Var> ilm_step(const IlmGraph& g, const IlmVars& state, std::size_t y_prev) {
  IlmVars next;
  next.decoder = model::decoder_step(*g.aed, state.decoder, y_prev, state.c_prev);
  Var c_hat;
  if (g.mini != nullptr) {
    auto cell = num::lstm_cell(num::row(g.aed->embedding, y_prev), state.mini_h, state.mini_cell, g.mini->lstm);
    next.mini_h = cell.h;
    next.mini_cell = cell.cell;
    c_hat = mini_output(*g.mini, cell.h);
  } else {
    c_hat = g.fixed;
  }
  next.c_prev = c_hat;
  return {next, model::readout(*g.aed, next.decoder.s, y_prev, c_hat)};
}

Var ilm_sequence_log_probs(const IlmGraph& g, std::span<const std::size_t> labels) {
  model::check_labels(labels, g.aed->model->vocab_size());
  IlmVars state = initial_ilm(g);
  std::vector<Var> rows;
  rows.reserve(labels.size() + 1);
  for (std::size_t i = 0; i <= labels.size(); ++i) {
    auto [next, lp] = ilm_step(g, state, i == 0 ? data::kBos : labels[i - 1]);
    rows.push_back(lp);
    state = std::move(next);
  }
  return num::stack_rows(rows);
}

IlmState initial_ilm_state(const model::AedModel& model, const ContextSource& source,
                           const model::EncoderOutput* enc) {
  source.require_resolved(model.encoder_dim());
  IlmState st;
  if (source.uses_features()) {
    if (enc == nullptr) throw UsageError("E_x[h] needs the utterance's encoder output");
    st.utterance_average = seq_encoder_avg(*enc);
  }
  num::Tape tape(false);
  model::AedGraph aed = model::bind_frozen(tape, model);
  MiniGraph mini;
  if (source.method() == Method::kMiniLstm) mini = bind_frozen(tape, source.mini());
  Var avg = source.uses_features() ? tape.input(st.utterance_average) : Var{};
  IlmGraph g = make_ilm_graph(aed, source.method() == Method::kMiniLstm ? &mini : nullptr, source, avg);
  IlmVars v = initial_ilm(g);
  st.decoder = model::initial_decoder_state(model);
  st.c_prev = v.c_prev.to_tensor();
  if (v.mini_h.valid()) {
    st.mini_h = v.mini_h.to_tensor();
    st.mini_cell = v.mini_cell.to_tensor();
  }
  return st;
}

std::pair<IlmState, num::Tensor> ilm_step(const IlmState& state, std::size_t y_prev, const ContextSource& source,
                                          const model::AedModel& model) {
  if (y_prev >= model.vocab_size()) throw IndexError("label " + std::to_string(y_prev) + " outside vocabulary");
  num::Tape tape(false);
  model::AedGraph aed = model::bind_frozen(tape, model);
  const bool has_mini = source.method() == Method::kMiniLstm;
  MiniGraph mini;
  if (has_mini) mini = bind_frozen(tape, source.mini());
  Var avg = source.uses_features() ? tape.input(state.utterance_average) : Var{};
  IlmGraph g = make_ilm_graph(aed, has_mini ? &mini : nullptr, source, avg);

  IlmVars v;
  v.decoder.kind = state.decoder.kind;
  v.decoder.s = tape.input(state.decoder.s);
  if (state.decoder.kind == model::DecoderKind::kLstm) v.decoder.cell = tape.input(state.decoder.cell);
  v.decoder.history = state.decoder.history;
  v.c_prev = tape.input(state.c_prev);
  if (has_mini) {
    v.mini_h = tape.input(state.mini_h);
    v.mini_cell = tape.input(state.mini_cell);
  }
  auto [next, lp] = ilm_step(g, v, y_prev);

  IlmState out;
  out.decoder.kind = next.decoder.kind;
  out.decoder.s = next.decoder.s.to_tensor();
  if (next.decoder.kind == model::DecoderKind::kLstm) out.decoder.cell = next.decoder.cell.to_tensor();
  out.decoder.history = std::move(next.decoder.history);
  out.decoder.step = state.decoder.step + 1;
  out.c_prev = next.c_prev.to_tensor();
  if (has_mini) {
    out.mini_h = next.mini_h.to_tensor();
    out.mini_cell = next.mini_cell.to_tensor();
  }
  out.utterance_average = state.utterance_average;
  out.step = state.step + 1;
  return {std::move(out), lp.to_tensor()};
}

double ilm_sequence_logprob(std::span<const std::size_t> labels, const ContextSource& source,
                            const model::AedModel& model, const model::EncoderOutput* enc) {
  source.require_resolved(model.encoder_dim());
  num::Tape tape(false);
  model::AedGraph aed = model::bind_frozen(tape, model);
  const bool has_mini = source.method() == Method::kMiniLstm;
  MiniGraph mini;
  if (has_mini) mini = bind_frozen(tape, source.mini());
  num::Tensor avg_value;
  Var avg;
  if (source.uses_features()) {
    if (enc == nullptr) throw UsageError("E_x[h] needs the utterance's encoder output");
    avg_value = seq_encoder_avg(*enc);
    avg = tape.input(avg_value);
  }
  IlmGraph g = make_ilm_graph(aed, has_mini ? &mini : nullptr, source, avg);
  auto values = ilm_sequence_log_probs(g, labels).values();
  const std::size_t vocab = model.vocab_size();
  double total = 0.0;
  for (std::size_t i = 0; i <= labels.size(); ++i)
    total += values[i * vocab + (i < labels.size() ? labels[i] : data::kEos)];
  return total;
}

namespace {

template <typename ScoreFn>
double perplexity_over(std::size_t n, std::size_t workers, ScoreFn score) {
  if (n == 0) throw InputError("perplexity needs a non-empty corpus");
  std::vector<double> nll(n);
  std::vector<std::size_t> tokens(n);
  util::parallel_for(n, workers, [&](std::size_t i) {
    auto [lp, count] = score(i);
    nll[i] = -lp;
    tokens[i] = count;
  });
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += nll[i];
    count += tokens[i];
  }
  return std::exp(total / static_cast<double>(count));
}

}  // namespace

double ilm_perplexity(const data::TextCorpus& text, const ContextSource& source, const model::AedModel& model,
                      std::size_t workers) {
  if (source.uses_features()) throw UsageError("E_x[h] perplexity needs a paired corpus with acoustics");
  source.require_resolved(model.encoder_dim());
  return perplexity_over(text.size(), workers, [&](std::size_t i) {
    const auto& labels = text.sentences[i].labels;
    return std::pair{ilm_sequence_logprob(labels, source, model), labels.size() + 1};
  });
}

double ilm_perplexity(const data::Corpus& corpus, const ContextSource& source, const model::AedModel& model,
                      std::size_t workers) {
  source.require_resolved(model.encoder_dim());
  return perplexity_over(corpus.size(), workers, [&](std::size_t i) {
    const auto& u = corpus.utterances[i];
    if (!source.uses_features()) return std::pair{ilm_sequence_logprob(u.labels, source, model), u.labels.size() + 1};
    model::EncoderOutput enc = model::encode(u.features, model);
    return std::pair{ilm_sequence_logprob(u.labels, source, model, &enc), u.labels.size() + 1};
  });
}

}  // namespace ilmlab::ilm
