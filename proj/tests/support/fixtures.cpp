#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>

namespace ilmlab::testing {

num::Tensor random_tensor(num::Shape shape, util::Rng& rng, double scale) {
  std::vector<double> v(num::element_count(shape));
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return num::Tensor(std::move(shape), std::move(v));
}

model::AedConfig tiny_aed_config(model::DecoderKind decoder, std::uint64_t seed, std::size_t vocab_size) {
  model::AedConfig c;
  c.vocab_size = vocab_size;
  c.feature_dim = 3;
  c.encoder_layers = 1;
  c.encoder_width = 3;
  c.embedding_dim = 3;
  c.attention_dim = 3;
  c.decoder = decoder;
  c.decoder_width = 4;
  c.context_k = 2;
  c.readout_dim = 3;
  c.init_scale = 0.5;
  c.seed = seed;
  return c;
}

model::AedModel tiny_aed(model::DecoderKind decoder, std::uint64_t seed, std::size_t vocab_size) {
  return model::AedModel(tiny_aed_config(decoder, seed, vocab_size),
                         data::Vocabulary::synthetic(vocab_size - data::kFirstLabel));
}

model::LmConfig tiny_lm_config(std::uint64_t seed, std::size_t vocab_size) {
  model::LmConfig c;
  c.vocab_size = vocab_size;
  c.embedding_dim = 3;
  c.hidden = 4;
  c.layers = 2;
  c.init_scale = 0.5;
  c.seed = seed;
  return c;
}

void zero_params(model::ParamStore& params) {
  for (auto* t : params.all())
    for (auto& x : t->mutable_values()) x = 0.0;
}

model::LanguageModel uniform_lm(std::size_t vocab_size) {
  model::LanguageModel lm(tiny_lm_config(1, vocab_size), data::Vocabulary::synthetic(vocab_size - data::kFirstLabel));
  zero_params(lm.params());
  return lm;
}

std::vector<std::size_t> random_labels(util::Rng& rng, std::size_t vocab_size, std::size_t min_len,
                                       std::size_t max_len) {
  const std::size_t n = min_len + rng.below(max_len - min_len + 1);
  std::vector<std::size_t> out(n);
  for (auto& y : out) y = data::kFirstLabel + rng.below(vocab_size - data::kFirstLabel);
  return out;
}

data::Corpus random_corpus(std::size_t n, std::size_t vocab_size, std::size_t feature_dim, util::Rng& rng,
                           std::size_t max_len) {
  data::Corpus c;
  c.feature_dim = feature_dim;
  for (std::size_t i = 0; i < n; ++i) {
    data::Utterance u;
    u.id = "u" + std::to_string(i);
    u.labels = random_labels(rng, vocab_size, 1, max_len);
    const std::size_t frames = u.labels.size() * (1 + rng.below(3));
    u.features = random_tensor({frames, feature_dim}, rng);
    c.utterances.push_back(std::move(u));
  }
  return c;
}

std::size_t reference_edit_distance(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

std::string scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ilmlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace ilmlab::testing
