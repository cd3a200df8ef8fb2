#pragma once

#include <cstdint>
#include <string>

#include "ilmlab/data/synthetic.hpp"
#include "ilmlab/fusion/decode.hpp"
#include "ilmlab/model/aed.hpp"
#include "ilmlab/model/lm.hpp"
#include "ilmlab/model/train.hpp"
#include "ilmlab/util/kv.hpp"

namespace ilmlab::cli {

/// Everything an experiment run depends on, read from one flat key-value
/// document. Keys are grouped by prefix:
///
///   seed                         base seed; every stage derives its own
///   data.*                       corpus sizes
///   task.*                       synthetic task generator
///   aed.*                        AED topology
///   lm.*                         external LM topology
///   train.{aed,lm,dr,mini}.*     epochs, batch_size, learning_rate, clip_norm
///   ilm.*                        Mini-LSTM width, subset fraction, step-zero rule
///   fusion.*                     method, scales, beam, output length
///   grid.*                       scale grid for tuning
///
/// Unknown keys are rejected.
struct ExperimentConfig {
  std::uint64_t seed = 1;

  std::size_t train_utts = 2000;
  std::size_t dev_utts = 100;
  std::size_t test_utts = 100;
  std::size_t source_dev_utts = 200;
  std::size_t lm_sentences = 5000;

  data::TaskParams task;
  model::AedConfig aed;
  model::LmConfig lm;
  model::TrainConfig aed_train;
  model::TrainConfig lm_train;
  model::TrainConfig dr_train;
  model::TrainConfig mini_train;

  std::size_t mini_hidden = 50;
  double subset_fraction = 0.1;
  bool zero_at_step_zero = true;

  fusion::FusionConfig fusion;
  fusion::GridSpec grid;

  /// Defaults overridden by `kv`.
  static ExperimentConfig from_kv(const util::KeyValues& kv);
  static ExperimentConfig defaults() { return from_kv({}); }
  /// Complete canonical key-value form (every key present).
  util::KeyValues to_kv() const;
  /// Hash of the canonical form.
  std::string hash() const;
};

/// Seeds for the individual stages, derived from the base seed.
enum class SeedTag : std::uint64_t {
  kTrainCorpus = 1,
  kDevCorpus,
  kTestCorpus,
  kSourceDevCorpus,
  kTargetText,
  kAedInit = 10,
  kAedBatches,
  kLmInit = 20,
  kLmBatches,
  kDrInit = 30,
  kDrBatches,
  kMiniInit = 40,
  kMiniBatches,
  kMiniSubset,
};
std::uint64_t stage_seed(const ExperimentConfig& c, SeedTag tag);

}  // namespace ilmlab::cli
