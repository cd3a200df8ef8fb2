#include "ilmlab/ilm/stats.hpp"

#include "ilmlab/util/error.hpp"
#include "ilmlab/util/parallel.hpp"

namespace ilmlab::ilm {

namespace {

constexpr std::size_t kShardSize = 32;

num::Tensor divided(const num::Tensor& sum, std::size_t count, const char* what) {
  if (count == 0) throw InputError(std::string("cannot average ") + what + " over zero items");
  std::vector<double> v(sum.values().begin(), sum.values().end());
  for (double& x : v) x /= static_cast<double>(count);
  return num::Tensor(sum.shape(), std::move(v));
}

void add_into(num::Tensor& acc, std::span<const double> values) {
  auto out = acc.mutable_values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += values[i];
}

}  // namespace

num::Tensor CorpusStats::context_average() const { return divided(sum_c, j_tot, "attention contexts"); }

num::Tensor CorpusStats::encoder_average() const { return divided(sum_h, t_tot, "encoder states"); }

void CorpusStats::merge(const CorpusStats& other) {
  if (sum_c.size() == 0) {
    *this = other;
    return;
  }
  add_into(sum_c, other.sum_c.values());
  add_into(sum_h, other.sum_h.values());
  j_tot += other.j_tot;
  t_tot += other.t_tot;
}

CorpusStats utterance_stats(const data::Utterance& u, const model::AedModel& model) {
  model::check_labels(u.labels, model.vocab_size());
  const std::size_t dim = model.encoder_dim();
  num::Tape tape(false);
  model::AedGraph g = model::bind_frozen(tape, model);
  num::Var enc = model::encode(g, tape.input(u.features));
  num::Var keys = model::attention_keys(g, enc);
  const std::size_t frames = enc.shape()[0];

  CorpusStats st;
  st.sum_c = num::Tensor::zeros({dim});
  st.sum_h = num::Tensor::zeros({dim});
  auto h = enc.values();
  auto sum_h = st.sum_h.mutable_values();
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t d = 0; d < dim; ++d) sum_h[d] += h[t * dim + d];
  st.t_tot = frames;

  model::DecoderVars state = model::initial_decoder(g);
  num::Var c_prev = tape.constant({dim}, std::vector<double>(dim, 0.0));
  num::Var beta = tape.constant({frames}, std::vector<double>(frames, 0.0));
  for (std::size_t i = 0; i <= u.labels.size(); ++i) {
    state = model::decoder_step(g, state, i == 0 ? data::kBos : u.labels[i - 1], c_prev);
    auto att = model::attend(g, enc, keys, state.s, beta);
    add_into(st.sum_c, att.context.values());
    beta = att.beta;
    c_prev = att.context;
  }
  st.j_tot = u.labels.size() + 1;
  return st;
}

CorpusStats accumulate_stats(const data::Corpus& corpus, const model::AedModel& model, std::size_t workers) {
  if (corpus.empty()) throw InputError("statistics need a non-empty corpus");
  const std::size_t shards = (corpus.size() + kShardSize - 1) / kShardSize;
  std::vector<CorpusStats> partial(shards);
  util::parallel_for(shards, workers, [&](std::size_t s) {
    const std::size_t end = std::min(corpus.size(), (s + 1) * kShardSize);
    for (std::size_t i = s * kShardSize; i < end; ++i) partial[s].merge(utterance_stats(corpus.utterances[i], model));
  });
  CorpusStats total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

num::Tensor seq_encoder_avg(const model::EncoderOutput& enc) {
  const std::size_t frames = enc.h.rows();
  const std::size_t dim = enc.h.cols();
  if (frames == 0) throw InputError("encoder output has no frames");
  std::vector<double> mean(dim, 0.0);
  auto h = enc.h.values();
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t d = 0; d < dim; ++d) mean[d] += h[t * dim + d];
  for (double& x : mean) x /= static_cast<double>(frames);
  return num::Tensor({dim}, std::move(mean));
}

}  // namespace ilmlab::ilm
