#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ilmlab/fusion/scorer.hpp"
#include "ilmlab/ilm/context.hpp"
#include "ilmlab/model/aed.hpp"
#include "ilmlab/model/lm.hpp"

namespace ilmlab::fusion {

/// Decoding recipes: no LM, shallow fusion, density ratio, or ILM
/// correction with one of the five context estimators.
enum class Method {
  kNone,
  kShallowFusion,
  kDensityRatio,
  kZero,
  kEncoderAverage,
  kContextAverage,
  kSequenceEncoderAverage,
  kMiniLstm,
};

/// "none", "SF", "DR", "zero", "E_D[h]", "E_D[c]", "E_x[h]", "MiniLSTM".
std::string method_name(Method m);
/// Canonical names (case-insensitive) or the aliases accepted by
/// ilm::parse_method.
Method parse_method(const std::string& name);
/// Table order: None, SF, DR, zero, E_D[h], E_D[c], E_x[h], MiniLSTM.
const std::vector<Method>& all_methods();
bool is_ilm_method(Method m);
ilm::Method to_ilm_method(Method m);
Method from_ilm_method(ilm::Method m);

struct FusionConfig {
  double lambda1 = 0.0;  ///< external LM scale
  double lambda2 = 0.0;  ///< subtracted prior (ILM or DR LM) scale
  Method method = Method::kNone;
  std::size_t beam_width = 12;
  std::size_t max_output_len = 20;
  /// Rank finished hypotheses by score / (labels + 1). Off by default.
  bool length_normalization = false;

  /// Copy with the method's forced scales applied: none zeroes both
  /// scales, SF zeroes lambda2.
  FusionConfig effective() const;
  /// Throws ConfigError on a zero beam or output length or negative scales.
  void validate() const;
};

/// Trained models available to the decoder. Sources are looked up by
/// estimator method.
struct FusionModels {
  const model::AedModel* aed = nullptr;
  const model::LanguageModel* external_lm = nullptr;
  const model::LanguageModel* density_ratio_lm = nullptr;
  std::vector<const ilm::ContextSource*> sources;

  const ilm::ContextSource* source(ilm::Method m) const;
  /// Throws ConfigError if a model needed by `method` is missing or any
  /// vocabulary size differs from the AED's.
  void check(Method method) const;
};

/// One decoding hypothesis. Component scores are log-probabilities summed
/// over the emitted labels (and the end sentinel once finished); `prior`
/// is the ILM or density-ratio LM score. `score` accumulates
/// aed + lambda1 * lm - lambda2 * prior step by step.
struct Hypothesis {
  std::vector<std::size_t> labels;
  double score = 0.0;
  double aed = 0.0;
  double lm = 0.0;
  double prior = 0.0;
  bool finished = false;
  NodeId node = PrefixTrie::kRoot;
};

/// Per-utterance search context: the prefix trie and the memoized scorers
/// of every model. Reusing one context across scales and methods avoids
/// recomputing any model step. Single-owner.
class UtteranceSearch {
 public:
  UtteranceSearch(const FusionModels& models, const num::Tensor& features);

  PrefixTrie& trie() noexcept { return trie_; }
  const FusionModels& models() const noexcept { return models_; }
  StepScorer& aed() { return *aed_; }
  /// External LM scorer; throws if the models have no external LM.
  StepScorer& lm();
  /// Subtracted model for DR or an ILM method.
  StepScorer& prior(Method method);
  std::size_t evaluations() const;

 private:
  const FusionModels& models_;
  const num::Tensor& features_;
  PrefixTrie trie_;
  std::unique_ptr<StepScorer> aed_;
  std::unique_ptr<StepScorer> lm_;
  std::unique_ptr<StepScorer> dr_;
  std::optional<model::EncoderOutput> enc_;
  std::vector<std::unique_ptr<StepScorer>> ilm_;
};

/// Component log-distributions of the label following `hyp`. Absent
/// components (not used by the method) are empty spans.
struct StepComponents {
  std::span<const double> aed;
  std::span<const double> lm;
  std::span<const double> prior;
};
StepComponents step_components(UtteranceSearch& search, const Hypothesis& hyp, const FusionConfig& config);

/// aed[v] + lambda1 * lm[v] - lambda2 * prior[v] for every vocabulary id.
std::vector<double> fused_step_scores(UtteranceSearch& search, const Hypothesis& hyp, const FusionConfig& config);

/// Label-synchronous beam search. Finished hypotheses stay in the beam and
/// compete with open ones; ties break towards the smaller label sequence,
/// then the shorter one. Outputs have between 1 and max_output_len labels.
/// Returns the finished hypotheses, best first.
std::vector<Hypothesis> beam_search(UtteranceSearch& search, const FusionConfig& config);

/// Scores every label sequence of length 1..max_len (guard: at most 10^6
/// sequences) and returns the best under the beam-search ordering.
Hypothesis exhaustive_search(UtteranceSearch& search, const FusionConfig& config, std::size_t max_len);

/// Drives one hypothesis along `labels` and finishes it with the end
/// sentinel.
Hypothesis force_align(UtteranceSearch& search, std::span<const std::size_t> labels, const FusionConfig& config);

/// Strict ordering used by search: higher score first, then the smaller
/// label sequence (finished sequences compared with the end sentinel
/// appended), then the shorter.
bool ranks_before(const Hypothesis& a, const Hypothesis& b, bool length_normalization = false);

}  // namespace ilmlab::fusion
