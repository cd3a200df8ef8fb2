#pragma once

#include <cmath>
#include <vector>

#include "ilmlab/data/corpus.hpp"
#include "ilmlab/model/train.hpp"
#include "ilmlab/numcore/optimizer.hpp"
#include "ilmlab/util/error.hpp"

namespace ilmlab::model::detail {

/// Shared epoch loop. `example_loss(tape, index, weight)` records the loss
/// of one example on the tape and returns (loss var, token count).
template <typename LossFn>
TrainResult run_training(std::size_t n_examples, const std::vector<std::size_t>& token_counts,
                         std::vector<num::Tensor*> params, const TrainConfig& config, LossFn example_loss) {
  if (n_examples == 0) throw InputError("training corpus is empty");
  num::Adam adam(std::move(params), {config.learning_rate, 0.9, 0.999, 1e-8, config.clip_norm});
  adam.zero_grad();
  data::BatchIterator batches(n_examples, config.batch_size, config.seed);
  TrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t tokens = 0;
    for (const auto& batch : batches.epoch(epoch)) {
      std::size_t batch_tokens = 0;
      for (std::size_t i : batch) batch_tokens += token_counts[i];
      for (std::size_t i : batch) {
        num::Tape tape;
        num::Var loss = example_loss(tape, i);
        const double per_token = loss.item();
        if (!std::isfinite(per_token)) throw TrainingError("non-finite training loss", static_cast<int>(epoch));
        loss_sum += per_token * static_cast<double>(token_counts[i]);
        tape.backward(num::scale(loss, static_cast<double>(token_counts[i]) / static_cast<double>(batch_tokens)));
      }
      tokens += batch_tokens;
      adam.step();
      ++result.steps;
    }
    const double mean = loss_sum / static_cast<double>(tokens);
    if (!std::isfinite(mean)) throw TrainingError("non-finite training loss", static_cast<int>(epoch));
    result.loss_curve.push_back(mean);
    if (config.on_epoch) config.on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace ilmlab::model::detail
