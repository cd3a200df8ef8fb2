// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. The experiment criteria run the full pipeline
// in-process under --out.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "grad_cases.hpp"
#include "ilmlab/cli/commands.hpp"
#include "ilmlab/fusion/metrics.hpp"
#include "ilmlab/fusion/report.hpp"
#include "ilmlab/ilm/estimator.hpp"
#include "ilmlab/ilm/scoring.hpp"
#include "ilmlab/ilm/stats.hpp"
#include "ilmlab/ilm/training.hpp"
#include "ilmlab/model/checkpoint.hpp"
#include "ilmlab/util/hash.hpp"

using namespace ilmlab;
namespace fs = std::filesystem;
using fusion::Method;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree_contents(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path().string());
  return out;
}

const std::string kDataDir = ILMLAB_TEST_DATA_DIR;

/// Runs the full pipeline for one decoder type unless a finished table from
/// the same config is already present.
struct Experiment {
  std::string dir;
  cli::RunContext ctx;
  std::vector<fusion::ResultRow> rows;
  double seconds = 0.0;

  const fusion::ResultRow& row(Method m) const {
    for (const auto& r : rows)
      if (r.method == m) return r;
    throw std::logic_error("missing row " + fusion::method_name(m));
  }
  /// Lowest test WER among the ILM-corrected rows.
  const fusion::ResultRow& best_ilm() const {
    const fusion::ResultRow* best = nullptr;
    for (const auto& r : rows)
      if (fusion::is_ilm_method(r.method) && (best == nullptr || r.test_wer < best->test_wer)) best = &r;
    return *best;
  }
};

Experiment run_experiment(const std::string& out, const std::string& name, const cli::Overrides& o) {
  Experiment e;
  e.dir = (fs::path(out) / name).string();
  fs::remove_all(e.dir);
  e.ctx.config = cli::resolve_config(kDataDir + "/experiment.kv", o);
  e.ctx.out_dir = e.dir;
  e.ctx.argv = {"ilmlab", "pipeline", name};
  e.ctx.workers = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = Clock::now();
  cli::cmd_pipeline(e.ctx);
  e.seconds = seconds_since(t0);
  e.rows = fusion::parse_table_kv(slurp(e.dir + "/results/table.kv"));
  std::cout << "  [" << name << " table, " << fmt(e.seconds, 4) << " s]\n" << slurp(e.dir + "/results/table.txt");
  return e;
}

/// Models of a finished experiment, loaded from its checkpoints.
struct Loaded {
  model::AedModel aed;
  model::LanguageModel lm;
  model::LanguageModel dr;
  std::vector<ilm::ContextSource> sources;
  fusion::FusionModels view;
  data::Corpus test;
  data::Corpus train;
  data::Corpus source_dev;
  util::KeyValues tuned;

  explicit Loaded(const std::string& dir)
      : aed(model::load_aed(dir + "/models/aed.ckpt")),
        lm(model::load_lm(dir + "/models/lm.ckpt")),
        dr(model::load_lm(dir + "/models/dr_lm.ckpt")),
        test(data::load_corpus(dir + "/data/test.corpus")),
        train(data::load_corpus(dir + "/data/train.corpus")),
        source_dev(data::load_corpus(dir + "/data/source_dev.corpus")),
        tuned(util::KeyValues::load(dir + "/results/tune.kv")) {
    for (Method m : fusion::all_methods())
      if (fusion::is_ilm_method(m))
        sources.push_back(ilm::load_estimator(dir + "/estimators/" + cli::method_slug(m) + ".est", aed));
    view.aed = &aed;
    view.external_lm = &lm;
    view.density_ratio_lm = &dr;
    for (const auto& s : sources) view.sources.push_back(&s);
  }
  Loaded(const Loaded&) = delete;

  const ilm::ContextSource& source(ilm::Method m) const {
    for (const auto& s : sources)
      if (s.method() == m) return s;
    throw std::logic_error("missing source");
  }
};

// ---------------------------------------------------------------------------

Outcome gradients() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_name;
  std::size_t cases = 0;
  for (const auto& c : testing::op_cases()) {
    util::Rng rng(util::derive_seed(2024, cases++));
    for (int i = 0; i < 20; ++i) {
      auto inst = c.make(rng);
      const double e = testing::check_gradients(inst.inputs, inst.build, 500 + i).max_rel_error;
      if (e > worst) worst = e, worst_name = c.name;
    }
  }
  for (const auto& c : testing::model_cases()) {
    ++cases;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const double e = c.run(seed).max_rel_error;
      if (e > worst) worst = e, worst_name = c.name;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0, std::to_string(cases) + " cases x 20 instances, max rel error " + fmt(worst) +
                                           " (" + worst_name + "), " + fmt(secs) + " s"};
}

Outcome search_oracle() {
  const auto t0 = Clock::now();
  util::Rng rng(77);
  std::size_t agree = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t vocab = 3 + rng.below(2);
    const std::size_t max_len = 1 + rng.below(4);
    auto kind = trial % 2 ? model::DecoderKind::kFeedForward : model::DecoderKind::kLstm;
    const auto aed = testing::tiny_aed(kind, 1000 + trial, vocab);
    const model::LanguageModel lm(testing::tiny_lm_config(2000 + trial, vocab),
                                  data::Vocabulary::synthetic(vocab - data::kFirstLabel));
    const model::LanguageModel dr(testing::tiny_lm_config(3000 + trial, vocab),
                                  data::Vocabulary::synthetic(vocab - data::kFirstLabel));
    std::vector<ilm::ContextSource> sources;
    sources.push_back(ilm::ContextSource::zero(aed.encoder_dim()));
    sources.push_back(ilm::ContextSource::context_average(testing::random_tensor({aed.encoder_dim()}, rng)));
    sources.push_back(ilm::ContextSource::encoder_average(testing::random_tensor({aed.encoder_dim()}, rng)));
    sources.push_back(ilm::ContextSource::sequence_encoder_average(aed.encoder_dim()));
    sources.push_back(ilm::ContextSource::mini_lstm(std::make_shared<ilm::MiniLstm>(
        aed, ilm::MiniLstmConfig{3, 0.5, static_cast<std::uint64_t>(trial)})));
    fusion::FusionModels models;
    models.aed = &aed;
    models.external_lm = &lm;
    models.density_ratio_lm = &dr;
    for (const auto& s : sources) models.sources.push_back(&s);

    const auto features = testing::random_tensor({2 + rng.below(5), aed.config().feature_dim}, rng);
    fusion::UtteranceSearch search(models, features);
    fusion::FusionConfig c;
    c.method = fusion::all_methods()[trial % fusion::all_methods().size()];
    c.lambda1 = rng.uniform() * 1.5;
    c.lambda2 = rng.uniform();
    c.max_output_len = max_len;
    // Every sequence of every length fits: the beam never prunes.
    std::size_t total = 0, level = 1;
    for (std::size_t l = 1; l <= max_len; ++l) total += (level *= vocab - data::kFirstLabel);
    c.beam_width = total + 1;
    const auto beam = fusion::beam_search(search, c);
    const auto best = fusion::exhaustive_search(search, c, max_len);
    if (!beam.empty() && beam.front().labels == best.labels && std::abs(beam.front().score - best.score) < 1e-9)
      ++agree;
    if (!beam.empty()) worst = std::max(worst, std::abs(beam.front().score - best.score));
  }
  const double secs = seconds_since(t0);
  return {agree == 100 && secs < 60.0, std::to_string(agree) + "/100 instances agree, max score gap " + fmt(worst) +
                                           ", " + fmt(secs) + " s"};
}

fusion::FusionConfig tuned_config(const Loaded& L, Method m, const cli::ExperimentConfig& cfg) {
  fusion::FusionConfig c = cfg.fusion;
  c.method = m;
  c.lambda1 = L.tuned.get_double(cli::method_slug(m) + ".lambda1", 0.0);
  c.lambda2 = L.tuned.get_double(cli::method_slug(m) + ".lambda2", 0.0);
  return c.effective();
}

Outcome fusion_identities(const Experiment& e, const Loaded& L) {
  std::size_t steps = 0, step_mismatch = 0;
  for (std::size_t u = 0; u < 20; ++u) {
    const auto& utt = L.test.utterances[u];
    fusion::UtteranceSearch search(L.view, utt.features);
    // Walk the reference prefixes.
    fusion::Hypothesis h;
    for (std::size_t i = 0; i <= utt.labels.size(); ++i) {
      const auto aed_span = search.aed().log_probs(search.trie(), h.node);
      const std::vector<double> aed(aed_span.begin(), aed_span.end());
      auto cfg = [](Method m, double l1, double l2) {
        fusion::FusionConfig c;
        c.method = m;
        c.lambda1 = l1;
        c.lambda2 = l2;
        return c;
      };
      const auto sf = fusion::fused_step_scores(search, h, cfg(Method::kShallowFusion, 0.8, 0.0));
      if (fusion::fused_step_scores(search, h, cfg(Method::kZero, 0.8, 0.0)) != sf) ++step_mismatch;
      for (Method m : fusion::all_methods())
        if (fusion::fused_step_scores(search, h, cfg(m, 0.0, 0.0)) != aed) ++step_mismatch;
      ++steps;
      if (i < utt.labels.size()) {
        h.node = search.trie().child(h.node, utt.labels[i]);
        h.labels.push_back(utt.labels[i]);
      }
    }
  }
  // Whole searches: zero at lambda2 = 0 against SF.
  std::size_t search_mismatch = 0;
  for (std::size_t u = 0; u < 10; ++u) {
    fusion::UtteranceSearch search(L.view, L.test.utterances[u].features);
    fusion::FusionConfig sf = e.ctx.config.fusion;
    sf.method = Method::kShallowFusion;
    sf.lambda1 = 0.8;
    sf.lambda2 = 0.0;
    fusion::FusionConfig zero = sf;
    zero.method = Method::kZero;
    const auto a = fusion::beam_search(search, sf);
    const auto b = fusion::beam_search(search, zero);
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].labels == b[i].labels && a[i].score == b[i].score;
    if (!same) ++search_mismatch;
  }
  // Re-verify every n-best entry written by eval.
  std::size_t entries = 0;
  double worst = 0.0;
  for (Method m : fusion::all_methods()) {
    const auto cfg = tuned_config(L, m, e.ctx.config);
    const auto nbest = fusion::parse_nbest(slurp(e.dir + "/decode/" + cli::method_slug(m) + ".nbest"),
                                           L.aed.vocabulary());
    std::map<std::string, const data::Utterance*> by_id;
    for (const auto& u : L.test.utterances) by_id[u.id] = &u;
    std::unique_ptr<fusion::UtteranceSearch> search;
    std::string current;
    for (const auto& entry : nbest) {
      if (entry.utterance != current) {
        search = std::make_unique<fusion::UtteranceSearch>(L.view, by_id.at(entry.utterance)->features);
        current = entry.utterance;
      }
      const auto h = fusion::force_align(*search, entry.labels, cfg);
      const double combined = entry.aed + cfg.lambda1 * entry.lm - cfg.lambda2 * entry.prior;
      for (double gap : {std::abs(h.aed - entry.aed), std::abs(h.lm - entry.lm), std::abs(h.prior - entry.prior),
                         std::abs(h.score - entry.score), std::abs(combined - entry.score)})
        worst = std::max(worst, gap);
      ++entries;
    }
  }
  const bool pass = step_mismatch == 0 && search_mismatch == 0 && entries > 0 && worst < 1e-9;
  return {pass, std::to_string(steps) + " prefixes, " + std::to_string(step_mismatch) + " bitwise mismatches; " +
                    std::to_string(search_mismatch) + "/10 search mismatches; " + std::to_string(entries) +
                    " n-best entries re-verified, max gap " + fmt(worst)};
}

Outcome ilm_invariance(const Loaded& L) {
  std::size_t compared = 0, differing = 0;
  for (ilm::Method m : {ilm::Method::kZero, ilm::Method::kContextAverage, ilm::Method::kEncoderAverage,
                        ilm::Method::kMiniLstm}) {
    const auto& source = L.source(m);
    for (std::size_t u = 0; u + 1 < 30; u += 2) {
      const auto enc_a = model::encode(L.test.utterances[u].features, L.aed);
      const auto enc_b = model::encode(L.test.utterances[u + 1].features, L.aed);
      auto a = fusion::make_ilm_scorer(L.aed, source, &enc_a);
      auto b = fusion::make_ilm_scorer(L.aed, source, &enc_b);
      fusion::PrefixTrie trie;
      fusion::NodeId node = fusion::PrefixTrie::kRoot;
      const auto& labels = L.test.utterances[u].labels;
      for (std::size_t i = 0; i <= labels.size(); ++i) {
        const auto pa = a->log_probs(trie, node);
        const auto pb = b->log_probs(trie, node);
        if (!std::equal(pa.begin(), pa.end(), pb.begin(), pb.end())) ++differing;
        ++compared;
        if (i < labels.size()) node = trie.child(node, labels[i]);
      }
    }
  }
  return {differing == 0 && compared > 0, std::to_string(compared) + " step distributions under swapped features, " +
                                              std::to_string(differing) + " differ"};
}

Outcome mini_lstm_training(const Experiment& e, const Loaded& L) {
  const auto& c = e.ctx.config;
  const auto before = L.aed.params().checksum();
  const auto t0 = Clock::now();
  auto mini = std::make_shared<ilm::MiniLstm>(
      L.aed, ilm::MiniLstmConfig{c.mini_hidden, c.aed.init_scale, cli::stage_seed(c, cli::SeedTag::kMiniInit)});
  const auto subset = ilm::select_subset(L.train, c.subset_fraction, cli::stage_seed(c, cli::SeedTag::kMiniSubset));
  ilm::train_mini_lstm(subset, L.aed, *mini, c.mini_train, c.zero_at_step_zero);
  const double secs = seconds_since(t0);
  const bool frozen = L.aed.params().checksum() == before;
  auto mini_source = ilm::ContextSource::mini_lstm(mini);
  mini_source.set_zero_at_step_zero(c.zero_at_step_zero);
  const auto held_out = data::TextCorpus::from_corpus(L.source_dev);
  const double ppl_mini = ilm::ilm_perplexity(held_out, mini_source, L.aed);
  const double ppl_zero = ilm::ilm_perplexity(held_out, L.source(ilm::Method::kZero), L.aed);
  return {frozen && ppl_mini < ppl_zero && secs < 180.0,
          std::string("AED checksum ") + (frozen ? "unchanged" : "CHANGED") + ", ILM PPL MiniLSTM " + fmt(ppl_mini, 4) +
              " vs zero " + fmt(ppl_zero, 4) + ", training " + fmt(secs) + " s"};
}

Outcome cross_domain(const Experiment& e) {
  const auto& none = e.row(Method::kNone);
  const auto& sf = e.row(Method::kShallowFusion);
  const auto& best = e.best_ilm();
  const double gain = (sf.test_wer - best.test_wer) / sf.test_wer;
  const bool pass = best.test_wer < sf.test_wer && sf.test_wer < none.test_wer && gain >= 0.05 && e.seconds < 900.0;
  return {pass, "test WER best ILM (" + fusion::method_name(best.method) + ") " + fmt(100 * best.test_wer, 4) +
                    "% < SF " + fmt(100 * sf.test_wer, 4) + "% < none " + fmt(100 * none.test_wer, 4) +
                    "%, relative gain over SF " + fmt(100 * gain) + "%, experiment " + fmt(e.seconds, 4) + " s"};
}

Outcome ff_parity(const Experiment& lstm, const Experiment& ff) {
  const double a = lstm.best_ilm().test_wer;
  const double b = ff.best_ilm().test_wer;
  const double ratio = b / a;
  const double ff_none = ff.row(Method::kNone).test_wer;
  const double lstm_none = lstm.row(Method::kNone).test_wer;
  return {ratio <= 1.10, "best ILM test WER FF " + fmt(100 * b, 4) + "% (" + fusion::method_name(ff.best_ilm().method) +
                             ") vs LSTM " + fmt(100 * a, 4) + "%, ratio " + fmt(ratio) + "; no-LM FF " +
                             fmt(100 * ff_none, 4) + "% vs LSTM " + fmt(100 * lstm_none, 4) + "%"};
}

Outcome estimator_algebra() {
  util::Rng rng(88);
  std::size_t exact = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto aed = testing::tiny_aed(trial % 2 ? model::DecoderKind::kFeedForward : model::DecoderKind::kLstm,
                                       400 + trial);
    data::Corpus one;
    one.feature_dim = aed.config().feature_dim;
    data::Utterance u;
    u.id = "a";
    u.labels = testing::random_labels(rng, 6, 0, 5);
    u.features = testing::random_tensor({1 + rng.below(8), one.feature_dim}, rng);
    one.utterances.push_back(u);
    if (ilm::accumulate_stats(one, aed).encoder_average() == ilm::seq_encoder_avg(model::encode(u.features, aed)))
      ++exact;

    data::Corpus two = one;
    data::Utterance v;
    v.id = "b";
    v.labels = testing::random_labels(rng, 6, 0, 5);
    v.features = testing::random_tensor({1 + rng.below(8), one.feature_dim}, rng);
    two.utterances.push_back(v);
    const auto stats = ilm::accumulate_stats(two, aed);
    // Brute force: list every context and every frame, then average flat.
    std::vector<num::Tensor> ctx_rows;
    std::vector<std::vector<double>> frame_rows;
    for (const auto& w : two.utterances) {
      const auto enc = model::encode(w.features, aed);
      for (std::size_t t = 0; t < enc.frames(); ++t) {
        std::vector<double> r(aed.encoder_dim());
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = enc.h.at(t, k);
        frame_rows.push_back(r);
      }
      auto state = model::initial_decoder_state(aed);
      num::Tensor c = num::Tensor::zeros({aed.encoder_dim()});
      num::Tensor beta = num::Tensor::zeros({enc.frames()});
      std::size_t y_prev = data::kBos;
      for (std::size_t y : model::with_end(w.labels)) {
        state = model::decoder_step(state, y_prev, c, aed);
        const auto att = model::attend(state.s, beta, enc, aed);
        ctx_rows.push_back(att.context);
        c = att.context;
        beta = att.beta;
        y_prev = y;
      }
    }
    for (std::size_t k = 0; k < aed.encoder_dim(); ++k) {
      double sc = 0.0, sh = 0.0;
      for (const auto& r : ctx_rows) sc += r[k];
      for (const auto& r : frame_rows) sh += r[k];
      worst = std::max(worst, std::abs(stats.context_average()[k] - sc / ctx_rows.size()));
      worst = std::max(worst, std::abs(stats.encoder_average()[k] - sh / frame_rows.size()));
    }
  }
  return {exact == 50 && worst < 1e-12, std::to_string(exact) + "/50 single-utterance cases exact, " +
                                            "two-utterance max deviation " + fmt(worst)};
}

Outcome metrics() {
  util::Rng rng(99);
  std::size_t agree = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = testing::random_labels(rng, 2 + 1 + rng.below(6), 0, 10);
    const auto b = testing::random_labels(rng, 2 + 1 + rng.below(6), 0, 10);
    if (fusion::edit_distance(a, b) == testing::reference_edit_distance(a, b)) ++agree;
  }
  double worst = 0.0;
  for (std::size_t v : {3, 7, 20}) {
    const auto corpus = testing::random_corpus(10, v, 3, rng);
    const auto text = data::TextCorpus::from_corpus(corpus);
    worst = std::max(worst, std::abs(fusion::lm_perplexity(text, testing::uniform_lm(v)) - static_cast<double>(v)));
    auto aed = testing::tiny_aed(model::DecoderKind::kLstm, v, v);
    testing::zero_params(aed.params());
    worst = std::max(worst, std::abs(ilm::ilm_perplexity(text, ilm::ContextSource::zero(aed.encoder_dim()), aed) -
                                     static_cast<double>(v)));
  }
  return {agree == 1000 && worst < 1e-9,
          std::to_string(agree) + "/1000 edit distances exact, uniform PPL max deviation " + fmt(worst)};
}

Outcome reproducibility(const std::string& out) {
  const std::string dir = (fs::path(out) / "smoke").string();
  fs::remove_all(dir);
  cli::RunContext ctx;
  ctx.config = cli::resolve_config(kDataDir + "/smoke.kv", {});
  ctx.out_dir = dir;
  ctx.argv = {"ilmlab", "pipeline", "--config", kDataDir + "/smoke.kv", "--out", dir};
  ctx.workers = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = Clock::now();
  cli::cmd_pipeline(ctx);
  const double secs = seconds_since(t0);
  const auto first = tree_contents(dir);
  // Second run from scratch into the same directory, with a different
  // worker count.
  fs::remove_all(dir);
  ctx.workers = 1;
  cli::cmd_pipeline(ctx);
  const auto second = tree_contents(dir);
  std::size_t manifests = 0, tables = 0, differing = 0;
  for (const auto& [rel, bytes] : first) {
    if (rel.rfind("manifests/", 0) == 0) ++manifests;
    if (rel.rfind("results/table", 0) == 0) ++tables;
    const auto it = second.find(rel);
    if (it == second.end() || it->second != bytes) ++differing;
  }
  if (second.size() != first.size()) ++differing;
  return {differing == 0 && manifests > 0 && tables == 2,
          std::to_string(first.size()) + " files (" + std::to_string(manifests) + " manifests, " +
              std::to_string(tables) + " tables), " + std::to_string(differing) + " differ; smoke run " + fmt(secs) +
              " s"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ilmlab acceptance checks"};
  std::string out = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--out", out, "Directory for experiment runs");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int n) { return selected.empty() || selected.count(n) > 0; };

  std::map<int, Outcome> results;
  auto run = [&](int n, const std::function<Outcome()>& f) {
    if (!wanted(n)) return;
    try {
      results[n] = f();
    } catch (const std::exception& ex) {
      results[n] = {false, std::string("error: ") + ex.what()};
    }
    std::cout << "Criterion " << n << ": " << (results[n].pass ? "PASS" : "FAIL") << " - " << results[n].detail
              << std::endl;
  };

  run(1, gradients);
  run(2, search_oracle);
  run(8, estimator_algebra);
  run(9, metrics);
  run(10, [&] { return reproducibility(out); });

  const bool need_lstm = wanted(3) || wanted(4) || wanted(5) || wanted(6) || wanted(7);
  std::optional<Experiment> lstm;
  std::unique_ptr<Loaded> loaded;
  std::string setup_error;
  if (need_lstm) {
    try {
      lstm = run_experiment(out, "lstm", {});
      loaded = std::make_unique<Loaded>(lstm->dir);
    } catch (const std::exception& ex) {
      setup_error = ex.what();
    }
  }
  auto with_lstm = [&](const std::function<Outcome()>& f) {
    return [&, f]() -> Outcome {
      if (!loaded) return {false, "LSTM experiment failed: " + setup_error};
      return f();
    };
  };
  run(3, with_lstm([&] { return fusion_identities(*lstm, *loaded); }));
  run(4, with_lstm([&] { return ilm_invariance(*loaded); }));
  run(5, with_lstm([&] { return mini_lstm_training(*lstm, *loaded); }));
  run(6, with_lstm([&] { return cross_domain(*lstm); }));
  run(7, with_lstm([&] {
    cli::Overrides o;
    o.decoder = "ff";
    o.context_k = 3;
    const auto ff = run_experiment(out, "ff", o);
    return ff_parity(*lstm, ff);
  }));

  std::cout << "\nsummary:";
  bool all = true;
  for (const auto& [n, r] : results) {
    std::cout << " " << n << (r.pass ? "+" : "-");
    all = all && r.pass;
  }
  std::cout << "\n";
  return all ? 0 : 1;
}
