#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ilmlab/data/vocabulary.hpp"
#include "ilmlab/fusion/search.hpp"
#include "ilmlab/util/kv.hpp"

namespace ilmlab::fusion {

/// One row of the WER table. `prior_ppl` is the perplexity of the
/// subtracted model (ILM estimate or density-ratio LM) on held-out source
/// transcriptions.
struct ResultRow {
  Method method = Method::kNone;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double dev_wer = 0.0;
  double test_wer = 0.0;
  std::optional<double> prior_ppl;
};

/// Fixed-width table, WERs in percent.
std::string format_table(const std::vector<ResultRow>& rows);
/// One `key=value` line per row with exact (round-trip) numbers.
std::string format_table_kv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_table_kv(const std::string& text);

struct NbestEntry {
  std::string utterance;
  std::size_t rank = 0;
  double score = 0.0;
  double aed = 0.0;
  double lm = 0.0;
  double prior = 0.0;
  std::vector<std::size_t> labels;
};

/// Line-delimited n-best file: a `#ilmlab-nbest v1` header carrying
/// `header` entries, then one tab-separated record per hypothesis:
///   utterance  rank  score  aed  lm  prior  tokens
std::string format_nbest(const std::vector<std::string>& ids, const std::vector<std::vector<Hypothesis>>& nbests,
                         const data::Vocabulary& vocab, const util::KeyValues& header);
std::vector<NbestEntry> parse_nbest(const std::string& text, const data::Vocabulary& vocab);

}  // namespace ilmlab::fusion
