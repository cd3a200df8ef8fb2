#include "ilmlab/ilm/training.hpp"

#include <algorithm>
#include <cmath>

#include "ilmlab/ilm/scoring.hpp"
#include "ilmlab/model/train_loop.hpp"
#include "ilmlab/util/error.hpp"

namespace ilmlab::ilm {

data::Corpus select_subset(const data::Corpus& corpus, double fraction, std::uint64_t seed) {
  if (corpus.empty()) throw InputError("cannot sample a subset of an empty corpus");
  if (!(fraction > 0.0) || fraction > 1.0) throw ConfigError("subset fraction must lie in (0, 1]");
  const auto wanted = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(corpus.size())));
  const std::size_t n = std::clamp<std::size_t>(wanted, 1, corpus.size());
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  util::Rng rng(seed);
  rng.shuffle(order);
  order.resize(n);
  std::sort(order.begin(), order.end());
  data::Corpus out;
  out.feature_dim = corpus.feature_dim;
  for (std::size_t i : order) out.utterances.push_back(corpus.utterances[i]);
  return out;
}

model::TrainResult train_mini_lstm(const data::Corpus& subset, const model::AedModel& aed, MiniLstm& mini,
                                   const model::TrainConfig& config, bool zero_at_step_zero) {
  if (subset.empty()) throw InputError("Mini-LSTM training subset is empty");
  if (mini.output_dim() != aed.encoder_dim() || mini.input_dim() != aed.config().embedding_dim)
    throw DimensionError("Mini-LSTM widths do not match the AED");
  subset.validate(aed.vocab_size());
  const std::string before = aed.params().checksum();

  // A non-owning handle: the source only lives for the duration of training.
  ContextSource source = ContextSource::mini_lstm(std::shared_ptr<const MiniLstm>(&mini, [](const MiniLstm*) {}));
  source.set_zero_at_step_zero(zero_at_step_zero);

  std::vector<std::size_t> tokens;
  std::vector<std::vector<std::size_t>> targets;
  for (const auto& u : subset.utterances) {
    targets.push_back(model::with_end(u.labels));
    tokens.push_back(u.labels.size() + 1);
  }
  auto result =
      model::detail::run_training(subset.size(), tokens, mini.params().all(), config, [&](num::Tape& tape, std::size_t i) {
        model::AedGraph g = model::bind_frozen(tape, aed);
        MiniGraph m = bind_trainable(tape, mini);
        IlmGraph ilm = make_ilm_graph(g, &m, source);
        return num::cross_entropy(ilm_sequence_log_probs(ilm, subset.utterances[i].labels), targets[i]);
      });

  if (aed.params().checksum() != before)
    throw InvariantError("AED parameters changed while training the Mini-LSTM");
  return result;
}

}  // namespace ilmlab::ilm
