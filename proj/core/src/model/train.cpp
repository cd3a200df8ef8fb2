#include "ilmlab/model/train.hpp"

#include <cmath>

#include "ilmlab/model/train_loop.hpp"
#include "ilmlab/util/error.hpp"

namespace ilmlab::model {

TrainConfig TrainConfig::from_kv(const util::KeyValues& kv, const std::string& prefix, const TrainConfig& defaults) {
  TrainConfig c = defaults;
  c.epochs = static_cast<std::size_t>(kv.get_int(prefix + "epochs", static_cast<std::int64_t>(c.epochs)));
  c.batch_size = static_cast<std::size_t>(kv.get_int(prefix + "batch_size", static_cast<std::int64_t>(c.batch_size)));
  c.learning_rate = kv.get_double(prefix + "learning_rate", c.learning_rate);
  c.clip_norm = kv.get_double(prefix + "clip_norm", c.clip_norm);
  return c;
}

std::vector<std::size_t> with_end(std::span<const std::size_t> labels) {
  std::vector<std::size_t> out(labels.begin(), labels.end());
  out.push_back(data::kEos);
  return out;
}


TrainResult train_aed(const data::Corpus& corpus, AedModel& model, const TrainConfig& config) {
  corpus.validate(model.vocab_size());
  std::vector<std::size_t> tokens;
  std::vector<std::vector<std::size_t>> targets;
  for (const auto& u : corpus.utterances) {
    targets.push_back(with_end(u.labels));
    tokens.push_back(u.labels.size() + 1);
  }
  return detail::run_training(corpus.size(), tokens, model.params().all(), config, [&](num::Tape& tape, std::size_t i) {
    AedGraph g = bind_trainable(tape, model);
    num::Var lp = sequence_log_probs(g, tape.input(corpus.utterances[i].features), corpus.utterances[i].labels);
    return num::cross_entropy(lp, targets[i]);
  });
}

TrainResult train_lm(const data::TextCorpus& text, LanguageModel& lm, const TrainConfig& config) {
  std::vector<std::size_t> tokens;
  std::vector<std::vector<std::size_t>> targets;
  for (const auto& s : text.sentences) {
    check_labels(s.labels, lm.vocab_size());
    targets.push_back(with_end(s.labels));
    tokens.push_back(s.labels.size() + 1);
  }
  return detail::run_training(text.size(), tokens, lm.params().all(), config, [&](num::Tape& tape, std::size_t i) {
    LmGraph g = bind_trainable(tape, lm);
    return num::cross_entropy(lm_sequence_log_probs(g, text.sentences[i].labels), targets[i]);
  });
}

double aed_mean_loss(const data::Corpus& corpus, const AedModel& model) {
  if (corpus.empty()) throw InputError("corpus is empty");
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& u : corpus.utterances) {
    total -= aed_sequence_logprob(u.features, u.labels, model);
    tokens += u.labels.size() + 1;
  }
  return total / static_cast<double>(tokens);
}

}  // namespace ilmlab::model
