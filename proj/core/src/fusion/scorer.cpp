#include "ilmlab/fusion/scorer.hpp"

#include "ilmlab/ilm/scoring.hpp"
#include "ilmlab/util/error.hpp"

namespace ilmlab::fusion {

PrefixTrie::PrefixTrie() { nodes_.push_back({0, data::kBos, 0}); }

NodeId PrefixTrie::child(NodeId node, std::size_t label) {
  const std::uint64_t key = (static_cast<std::uint64_t>(node) << 24) | static_cast<std::uint64_t>(label);
  auto it = children_.find(key);
  if (it != children_.end()) return it->second;
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({node, label, nodes_[node].depth + 1});
  children_.emplace(key, id);
  return id;
}

std::vector<std::size_t> PrefixTrie::labels(NodeId node) const {
  std::vector<std::size_t> out(nodes_[node].depth);
  for (std::size_t k = out.size(); k > 0; --k) {
    out[k - 1] = nodes_[node].label;
    node = nodes_[node].parent;
  }
  return out;
}

namespace {

struct AedState {
  model::DecoderState decoder;
  num::Tensor beta;
  num::Tensor c_prev;
};

class AedScorer final : public CachedScorer<AedState> {
 public:
  AedScorer(const model::AedModel& aed, const num::Tensor& features) : aed_(aed) {
    num::Tape tape(false);
    model::AedGraph g = model::bind_frozen(tape, aed);
    num::Var enc = model::encode(g, tape.input(features));
    enc_ = enc.to_tensor();
    keys_ = model::attention_keys(g, enc).to_tensor();
  }

 protected:
  AedState initial() const override {
    return {model::initial_decoder_state(aed_), num::Tensor::zeros({enc_.rows()}),
            num::Tensor::zeros({aed_.encoder_dim()})};
  }

  std::pair<AedState, num::Tensor> advance(const AedState& st, std::size_t y_prev) const override {
    num::Tape tape(false);
    model::AedGraph g = model::bind_frozen(tape, aed_);
    model::DecoderVars prev;
    prev.kind = st.decoder.kind;
    prev.s = tape.input(st.decoder.s);
    if (prev.kind == model::DecoderKind::kLstm) prev.cell = tape.input(st.decoder.cell);
    prev.history = st.decoder.history;
    model::DecoderVars next = model::decoder_step(g, prev, y_prev, tape.input(st.c_prev));
    auto att = model::attend(g, tape.input(enc_), tape.input(keys_), next.s, tape.input(st.beta));
    num::Var lp = model::readout(g, next.s, y_prev, att.context);

    AedState out;
    out.decoder.kind = next.kind;
    out.decoder.s = next.s.to_tensor();
    if (next.kind == model::DecoderKind::kLstm) out.decoder.cell = next.cell.to_tensor();
    out.decoder.history = std::move(next.history);
    out.decoder.step = st.decoder.step + 1;
    out.beta = att.beta.to_tensor();
    out.c_prev = att.context.to_tensor();
    return {std::move(out), lp.to_tensor()};
  }

 private:
  const model::AedModel& aed_;
  num::Tensor enc_;
  num::Tensor keys_;
};

class LmScorer final : public CachedScorer<model::LmState> {
 public:
  explicit LmScorer(const model::LanguageModel& lm) : lm_(lm) {}

 protected:
  model::LmState initial() const override { return model::initial_lm_state(lm_); }
  std::pair<model::LmState, num::Tensor> advance(const model::LmState& st, std::size_t y_prev) const override {
    return model::lm_step(st, y_prev, lm_);
  }

 private:
  const model::LanguageModel& lm_;
};

class IlmScorer final : public CachedScorer<ilm::IlmState> {
 public:
  IlmScorer(const model::AedModel& aed, const ilm::ContextSource& source, const model::EncoderOutput* enc)
      : aed_(aed), source_(source), initial_(ilm::initial_ilm_state(aed, source, enc)) {}

 protected:
  ilm::IlmState initial() const override { return initial_; }
  std::pair<ilm::IlmState, num::Tensor> advance(const ilm::IlmState& st, std::size_t y_prev) const override {
    return ilm::ilm_step(st, y_prev, source_, aed_);
  }

 private:
  const model::AedModel& aed_;
  const ilm::ContextSource& source_;
  ilm::IlmState initial_;
};

}  // namespace

std::unique_ptr<StepScorer> make_aed_scorer(const model::AedModel& aed, const num::Tensor& features) {
  return std::make_unique<AedScorer>(aed, features);
}

std::unique_ptr<StepScorer> make_lm_scorer(const model::LanguageModel& lm) { return std::make_unique<LmScorer>(lm); }

std::unique_ptr<StepScorer> make_ilm_scorer(const model::AedModel& aed, const ilm::ContextSource& source,
                                            const model::EncoderOutput* enc) {
  return std::make_unique<IlmScorer>(aed, source, enc);
}

}  // namespace ilmlab::fusion
