#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ilmlab/data/corpus.hpp"
#include "ilmlab/model/aed.hpp"
#include "ilmlab/model/lm.hpp"
#include "ilmlab/util/random.hpp"

namespace ilmlab::testing {

num::Tensor random_tensor(num::Shape shape, util::Rng& rng, double scale = 1.0);

/// A few units per layer, large enough init to exercise every nonlinearity.
model::AedConfig tiny_aed_config(model::DecoderKind decoder, std::uint64_t seed, std::size_t vocab_size = 6);
model::AedModel tiny_aed(model::DecoderKind decoder, std::uint64_t seed, std::size_t vocab_size = 6);
model::LmConfig tiny_lm_config(std::uint64_t seed, std::size_t vocab_size = 6);

/// Every parameter set to zero.
void zero_params(model::ParamStore& params);
/// LM with all-zero weights: uniform over the vocabulary.
model::LanguageModel uniform_lm(std::size_t vocab_size);

/// Ordinary labels in [kFirstLabel, vocab_size).
std::vector<std::size_t> random_labels(util::Rng& rng, std::size_t vocab_size, std::size_t min_len, std::size_t max_len);
/// Random paired corpus with 1..3 frames per label.
data::Corpus random_corpus(std::size_t n, std::size_t vocab_size, std::size_t feature_dim, util::Rng& rng,
                           std::size_t max_len = 4);

/// Full-matrix Levenshtein recursion, written independently of the library.
std::size_t reference_edit_distance(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

/// Fresh empty directory under the system temp dir.
std::string scratch_dir(const std::string& name);

}  // namespace ilmlab::testing
