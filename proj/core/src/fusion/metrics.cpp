#include "ilmlab/fusion/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ilmlab/util/error.hpp"
#include "ilmlab/util/parallel.hpp"

namespace ilmlab::fusion {

std::size_t edit_distance(std::span<const std::size_t> ref, std::span<const std::size_t> hyp) {
  std::vector<std::size_t> row(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (ref[i - 1] == hyp[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[hyp.size()];
}

double word_error_rate(const std::vector<std::vector<std::size_t>>& refs,
                       const std::vector<std::vector<std::size_t>>& hyps) {
  if (refs.size() != hyps.size())
    throw InputError("WER needs one hypothesis per reference (" + std::to_string(refs.size()) + " vs " +
                     std::to_string(hyps.size()) + ")");
  std::size_t errors = 0;
  std::size_t words = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    errors += edit_distance(refs[i], hyps[i]);
    words += refs[i].size();
  }
  if (words == 0) throw InputError("WER needs a non-empty reference set");
  return static_cast<double>(errors) / static_cast<double>(words);
}

double lm_perplexity(const data::TextCorpus& text, const model::LanguageModel& lm, std::size_t workers) {
  if (text.empty()) throw InputError("perplexity needs a non-empty corpus");
  std::vector<double> lp(text.size());
  util::parallel_for(text.size(), workers,
                     [&](std::size_t i) { lp[i] = model::lm_sequence_logprob(text.sentences[i].labels, lm); });
  double nll = 0.0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    nll -= lp[i];
    tokens += text.sentences[i].labels.size() + 1;
  }
  return std::exp(nll / static_cast<double>(tokens));
}

}  // namespace ilmlab::fusion
