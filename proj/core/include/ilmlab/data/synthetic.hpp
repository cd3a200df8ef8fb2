#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ilmlab/data/corpus.hpp"
#include "ilmlab/data/vocabulary.hpp"
#include "ilmlab/util/kv.hpp"

namespace ilmlab::data {

enum class Domain { kSource, kTarget };

std::string domain_name(Domain d);
Domain parse_domain(const std::string& name);

/// Generator parameters, stored as a flat key-value document.
///
/// Labels are grouped into acoustic clusters of `cluster_size`. Members of a
/// cluster sit `cluster_edge` apart around a shared center; with probability
/// `ambiguity_rate` a label's frames are emitted around the cluster center
/// instead, so only the label context can tell the members apart. Both
/// domains prefer the same successor clusters after each label but a
/// different member inside each cluster, which is what makes a
/// source-domain label prior harmful on target-domain speech.
struct TaskParams {
  std::size_t num_labels = 50;
  std::size_t feature_dim = 16;
  double sigma = 0.3;
  std::size_t min_length = 4;
  std::size_t max_length = 12;
  std::size_t min_frames = 1;
  std::size_t max_frames = 3;
  std::size_t cluster_size = 3;
  double cluster_edge = 1.5;
  double cluster_spread = 2.0;
  double ambiguity_rate = 0.25;
  std::size_t branching = 3;
  double peak_mass = 0.9;
  std::uint64_t seed = 1;

  util::KeyValues to_kv() const;
  /// Unknown keys are rejected.
  static TaskParams from_kv(const util::KeyValues& kv);
  static const std::vector<std::string>& keys();
};

/// A fully built synthetic task: vocabulary, bigram tables and emission
/// model. Everything is a pure function of TaskParams.
class SyntheticTask {
 public:
  explicit SyntheticTask(TaskParams params);

  const TaskParams& params() const noexcept { return params_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }

  /// Row 0 conditions on the begin sentinel, row r > 0 on label index r-1.
  /// Columns are label indices (id - kFirstLabel). Rows sum to 1.
  const std::vector<std::vector<double>>& table(Domain d) const {
    return d == Domain::kSource ? source_table_ : target_table_;
  }
  /// Label means, one row per label index.
  const std::vector<std::vector<double>>& means() const noexcept { return means_; }
  const std::vector<std::vector<double>>& cluster_centers() const noexcept { return centers_; }
  std::size_t cluster_of(std::size_t label_index) const { return label_index / params_.cluster_size; }
  double min_mean_distance() const noexcept { return min_distance_; }

 private:
  TaskParams params_;
  Vocabulary vocab_;
  std::vector<std::vector<double>> source_table_;
  std::vector<std::vector<double>> target_table_;
  std::vector<std::vector<double>> means_;
  std::vector<std::vector<double>> centers_;
  double min_distance_ = 0.0;
};

/// Utterance i depends only on (task, domain, seed, i).
Corpus generate_corpus(const SyntheticTask& task, std::size_t n_utts, Domain domain, std::uint64_t seed);
TextCorpus generate_text(const SyntheticTask& task, std::size_t n_sentences, Domain domain, std::uint64_t seed);

}  // namespace ilmlab::data
