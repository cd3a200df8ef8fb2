#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ilmlab/data/corpus.hpp"
#include "ilmlab/model/aed.hpp"
#include "ilmlab/model/lm.hpp"
#include "ilmlab/util/kv.hpp"

namespace ilmlab::model {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double clip_norm = 0.0;
  std::uint64_t seed = 1;
  /// Called after every epoch with (epoch index, mean token loss).
  std::function<void(std::size_t, double)> on_epoch;

  /// Reads `<prefix>epochs`, `<prefix>batch_size`, ... from a config.
  static TrainConfig from_kv(const util::KeyValues& kv, const std::string& prefix, const TrainConfig& defaults);
};

struct TrainResult {
  /// Mean per-token cross-entropy of each epoch, measured while training.
  std::vector<double> loss_curve;
  std::size_t steps = 0;
};

/// Label cross-entropy training of the full AED. Throws TrainingError with
/// the epoch index if the loss becomes non-finite.
TrainResult train_aed(const data::Corpus& corpus, AedModel& model, const TrainConfig& config);
TrainResult train_lm(const data::TextCorpus& text, LanguageModel& lm, const TrainConfig& config);

/// Mean per-token cross-entropy (end sentinel included) without training.
double aed_mean_loss(const data::Corpus& corpus, const AedModel& model);

/// Appends the end sentinel.
std::vector<std::size_t> with_end(std::span<const std::size_t> labels);

}  // namespace ilmlab::model
