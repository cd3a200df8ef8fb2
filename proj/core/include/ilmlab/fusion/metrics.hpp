#pragma once

#include <span>
#include <vector>

#include "ilmlab/data/corpus.hpp"
#include "ilmlab/model/lm.hpp"

namespace ilmlab::fusion {

/// Levenshtein distance with unit substitution, insertion and deletion
/// costs.
std::size_t edit_distance(std::span<const std::size_t> ref, std::span<const std::size_t> hyp);

/// Σ edit distances / Σ reference lengths. Throws InputError on an empty
/// or zero-length reference set or a count mismatch.
double word_error_rate(const std::vector<std::vector<std::size_t>>& refs,
                       const std::vector<std::vector<std::size_t>>& hyps);

/// exp of the mean per-token negative log-probability, end sentinel
/// included.
double lm_perplexity(const data::TextCorpus& text, const model::LanguageModel& lm, std::size_t workers = 1);

}  // namespace ilmlab::fusion
