#include <benchmark/benchmark.h>

#include "ilmlab/data/synthetic.hpp"
#include "ilmlab/fusion/search.hpp"
#include "ilmlab/numcore/ops.hpp"
#include "ilmlab/util/random.hpp"

using namespace ilmlab;

namespace {

num::Tensor random_tensor(num::Shape shape, util::Rng& rng) {
  num::Tensor t = num::Tensor::zeros(shape);
  for (auto& x : t.mutable_values()) x = rng.normal();
  return t;
}

model::AedConfig bench_config(std::size_t vocab) {
  model::AedConfig c;
  c.vocab_size = vocab;
  c.feature_dim = 16;
  c.encoder_width = 32;
  c.embedding_dim = 16;
  c.attention_dim = 32;
  c.decoder_width = 64;
  c.readout_dim = 32;
  return c;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  util::Rng rng(1);
  const auto a = random_tensor({n, n}, rng);
  const auto b = random_tensor({n, n}, rng);
  for (auto _ : state) {
    num::Tape tape(false);
    benchmark::DoNotOptimize(num::matmul(tape.input(a), tape.input(b)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  util::Rng rng(2);
  auto a = random_tensor({n, n}, rng);
  a = num::Tensor(a.shape(), {a.values().begin(), a.values().end()}, true);
  const auto b = random_tensor({n, n}, rng);
  for (auto _ : state) {
    a.zero_grad();
    num::Tape tape;
    tape.backward(num::sum(num::matmul(tape.param(a), tape.input(b))));
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(16)->Arg(64);

void BM_DecoderStep(benchmark::State& state) {
  const model::AedModel aed(bench_config(30), data::Vocabulary::synthetic(28));
  util::Rng rng(3);
  const auto c = random_tensor({aed.encoder_dim()}, rng);
  const auto s0 = model::initial_decoder_state(aed);
  for (auto _ : state) benchmark::DoNotOptimize(model::decoder_step(s0, 5, c, aed));
}
BENCHMARK(BM_DecoderStep);

void BM_BeamSearch(benchmark::State& state) {
  const model::AedModel aed(bench_config(30), data::Vocabulary::synthetic(28));
  const model::LanguageModel lm(model::LmConfig::decoder_like(aed.config(), 4), data::Vocabulary::synthetic(28));
  const auto source = ilm::ContextSource::zero(aed.encoder_dim());
  fusion::FusionModels models;
  models.aed = &aed;
  models.external_lm = &lm;
  models.sources = {&source};
  util::Rng rng(5);
  const auto features = random_tensor({40, 16}, rng);
  fusion::FusionConfig cfg;
  cfg.method = fusion::Method::kZero;
  cfg.lambda1 = 0.5;
  cfg.lambda2 = 0.2;
  cfg.beam_width = static_cast<std::size_t>(state.range(0));
  cfg.max_output_len = 10;
  for (auto _ : state) {
    fusion::UtteranceSearch search(models, features);
    benchmark::DoNotOptimize(fusion::beam_search(search, cfg));
  }
}
BENCHMARK(BM_BeamSearch)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
