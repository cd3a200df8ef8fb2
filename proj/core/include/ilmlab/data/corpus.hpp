#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ilmlab/numcore/tensor.hpp"

namespace ilmlab::data {

/// One paired example. Labels exclude the sentinels; consumers append the
/// end sentinel themselves.
struct Utterance {
  std::string id;
  num::Tensor features;  // [frames x feature_dim]
  std::vector<std::size_t> labels;

  std::size_t frames() const { return features.rows(); }
};

struct Corpus {
  std::size_t feature_dim = 0;
  std::vector<Utterance> utterances;

  std::size_t size() const noexcept { return utterances.size(); }
  bool empty() const noexcept { return utterances.empty(); }
  /// Throws if an utterance breaks the frame-count or vocabulary invariants.
  void validate(std::size_t vocab_size) const;
};

struct Sentence {
  std::string id;
  std::vector<std::size_t> labels;
};

/// Label sequences without acoustics (LM training / perplexity).
struct TextCorpus {
  std::vector<Sentence> sentences;

  std::size_t size() const noexcept { return sentences.size(); }
  bool empty() const noexcept { return sentences.empty(); }
  /// Transcriptions of a paired corpus.
  static TextCorpus from_corpus(const Corpus& corpus);
};

/// Line-delimited corpus files. Paired corpora store features as
/// base-16-encoded little-endian float64 values, so round-trips are
/// bit-exact. Malformed input raises FormatError with a byte offset.
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);
std::string encode_corpus(const Corpus& corpus);
Corpus decode_corpus(const std::string& bytes);

void save_text(const TextCorpus& text, const std::string& path);
TextCorpus load_text(const std::string& path);
std::string encode_text(const TextCorpus& text);
TextCorpus decode_text(const std::string& bytes);

/// Deterministic shuffled batching: each epoch visits every utterance index
/// exactly once, in an order fixed by (seed, epoch).
class BatchIterator {
 public:
  BatchIterator(std::size_t corpus_size, std::size_t batch_size, std::uint64_t seed);

  std::vector<std::vector<std::size_t>> epoch(std::size_t epoch_index) const;

 private:
  std::size_t corpus_size_;
  std::size_t batch_size_;
  std::uint64_t seed_;
};

}  // namespace ilmlab::data
