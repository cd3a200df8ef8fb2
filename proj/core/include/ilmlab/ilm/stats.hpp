#pragma once

#include "ilmlab/data/corpus.hpp"
#include "ilmlab/model/aed.hpp"
#include "ilmlab/numcore/tensor.hpp"

namespace ilmlab::ilm {

/// Sums collected by a teacher-forced pass over training data.
struct CorpusStats {
  num::Tensor sum_c;  ///< Σ of attention contexts c_j, j >= 1
  std::size_t j_tot = 0;  ///< number of decoder steps (labels + end sentinel)
  num::Tensor sum_h;  ///< Σ of encoder states h_t
  std::size_t t_tot = 0;  ///< number of encoder frames

  /// E_D[c] = sum_c / j_tot.
  num::Tensor context_average() const;
  /// E_D[h] = sum_h / t_tot.
  num::Tensor encoder_average() const;
  /// Adds another partial result (sums and counts).
  void merge(const CorpusStats& other);
};

/// Statistics of a single utterance.
CorpusStats utterance_stats(const data::Utterance& u, const model::AedModel& model);

/// Shards the corpus into fixed blocks, accumulates each block in order and
/// merges the partial sums in block order, so the result does not depend on
/// the worker count.
CorpusStats accumulate_stats(const data::Corpus& corpus, const model::AedModel& model, std::size_t workers = 1);

/// Mean of the encoder rows: (1/T) Σ_t h_t.
num::Tensor seq_encoder_avg(const model::EncoderOutput& enc);

}  // namespace ilmlab::ilm
