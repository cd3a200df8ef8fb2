#pragma once

#include "ilmlab/data/corpus.hpp"
#include "ilmlab/ilm/context.hpp"
#include "ilmlab/model/train.hpp"

namespace ilmlab::ilm {

/// Seeded sample of round(fraction * size) utterances (at least one), kept
/// in corpus order.
data::Corpus select_subset(const data::Corpus& corpus, double fraction, std::uint64_t seed);

/// Trains the Mini-LSTM on the label cross-entropy of the ĉ-substituted
/// decoder, i.e. minimizes ILM perplexity, with every AED parameter frozen.
/// Throws InvariantError if the AED checksum changes.
model::TrainResult train_mini_lstm(const data::Corpus& subset, const model::AedModel& aed, MiniLstm& mini,
                                   const model::TrainConfig& config, bool zero_at_step_zero = true);

}  // namespace ilmlab::ilm
