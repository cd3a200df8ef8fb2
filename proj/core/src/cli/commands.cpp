#include "ilmlab/cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "ilmlab/data/synthetic.hpp"
#include "ilmlab/fusion/metrics.hpp"
#include "ilmlab/fusion/report.hpp"
#include "ilmlab/ilm/estimator.hpp"
#include "ilmlab/ilm/scoring.hpp"
#include "ilmlab/ilm/stats.hpp"
#include "ilmlab/ilm/training.hpp"
#include "ilmlab/model/checkpoint.hpp"
#include "ilmlab/util/error.hpp"
#include "ilmlab/util/hash.hpp"

namespace ilmlab::cli {

namespace fs = std::filesystem;

util::KeyValues Overrides::as_kv() const {
  util::KeyValues kv;
  if (seed) kv.set("seed", static_cast<std::int64_t>(*seed));
  if (method) kv.set("fusion.method", *method);
  if (lambda1) kv.set("fusion.lambda1", *lambda1);
  if (lambda2) kv.set("fusion.lambda2", *lambda2);
  if (beam) kv.set("fusion.beam", *beam);
  if (decoder) kv.set("aed.decoder", *decoder);
  if (decoder_width) kv.set("aed.decoder_width", *decoder_width);
  if (context_k) kv.set("aed.context_k", *context_k);
  return kv;
}

ExperimentConfig resolve_config(const std::optional<std::string>& config_path, const Overrides& overrides) {
  util::KeyValues kv;
  if (config_path) {
    if (!fs::exists(*config_path)) throw InputError("config file " + *config_path + " does not exist");
    kv = util::KeyValues::load(*config_path);
  }
  kv.merge(overrides.as_kv());
  return ExperimentConfig::from_kv(kv);
}

std::string command_name(Command c) {
  switch (c) {
    case Command::kGen: return "gen";
    case Command::kTrainAed: return "train-aed";
    case Command::kTrainLm: return "train-lm";
    case Command::kEstimate: return "estimate";
    case Command::kTune: return "tune";
    case Command::kDecode: return "decode";
    case Command::kEval: return "eval";
    case Command::kPipeline: return "pipeline";
  }
  return "?";
}

std::string method_slug(fusion::Method m) {
  switch (m) {
    case fusion::Method::kNone: return "none";
    case fusion::Method::kShallowFusion: return "sf";
    case fusion::Method::kDensityRatio: return "dr";
    case fusion::Method::kZero: return "zero";
    case fusion::Method::kEncoderAverage: return "ed-h";
    case fusion::Method::kContextAverage: return "ed-c";
    case fusion::Method::kSequenceEncoderAverage: return "ex-h";
    case fusion::Method::kMiniLstm: return "mini-lstm";
  }
  return "?";
}

namespace {

const char* const kTrainCorpus = "data/train.corpus";
const char* const kDevCorpus = "data/dev.corpus";
const char* const kTestCorpus = "data/test.corpus";
const char* const kSourceDevCorpus = "data/source_dev.corpus";
const char* const kTargetText = "data/target.text";
const char* const kSourceText = "data/source.text";
const char* const kTaskFile = "data/task.kv";
const char* const kAedCkpt = "models/aed.ckpt";
const char* const kLmCkpt = "models/lm.ckpt";
const char* const kDrCkpt = "models/dr_lm.ckpt";
const char* const kTuneFile = "results/tune.kv";
const char* const kTableText = "results/table.txt";
const char* const kTableKv = "results/table.kv";

std::string estimator_path(fusion::Method m) { return "estimators/" + method_slug(m) + ".est"; }

std::ostream& log(const RunContext& ctx) {
  static std::ostream null(nullptr);
  return ctx.log != nullptr ? *ctx.log : null;
}

std::string full(const RunContext& ctx, const std::string& rel) { return (fs::path(ctx.out_dir) / rel).string(); }

void prepare(const RunContext& ctx, const std::string& rel) {
  fs::create_directories(fs::path(full(ctx, rel)).parent_path());
}

void write_text(const RunContext& ctx, const std::string& rel, const std::string& text) {
  prepare(ctx, rel);
  std::ofstream f(full(ctx, rel), std::ios::binary);
  f << text;
  if (!f) throw InputError("cannot write " + full(ctx, rel));
}

/// Inputs and outputs of one command, written on success.
class Manifest {
 public:
  Manifest(const RunContext& ctx, Command c) : ctx_(ctx), name_(command_name(c)) {
    kv_.set("command", name_);
    std::string argv;
    for (const auto& a : ctx.argv) argv += (argv.empty() ? "" : " ") + a;
    kv_.set("argv", argv);
    kv_.set("config_hash", ctx.config.hash());
  }

  /// Hashes an existing input, or names the command that produces it.
  void input(const std::string& rel, const std::string& producer) {
    if (!fs::exists(full(ctx_, rel))) throw MissingArtifactError(rel, producer);
    kv_.set("input." + rel, util::hash_file(full(ctx_, rel)));
  }
  void output(const std::string& rel) { kv_.set("output." + rel, util::hash_file(full(ctx_, rel))); }
  void note(const std::string& key, const std::string& value) { kv_.set("note." + key, value); }

  void save() {
    const std::string config_rel = "manifests/" + name_ + ".config.kv";
    write_text(ctx_, config_rel, ctx_.config.to_kv().serialize());
    kv_.set("config_file", config_rel);
    write_text(ctx_, "manifests/" + name_ + ".manifest", kv_.serialize());
  }

 private:
  const RunContext& ctx_;
  std::string name_;
  util::KeyValues kv_;
};

std::vector<fusion::Method> selected_methods(const RunContext& ctx, bool ilm_only) {
  std::vector<fusion::Method> out;
  if (ctx.method) {
    const auto m = fusion::parse_method(*ctx.method);
    if (ilm_only && !fusion::is_ilm_method(m))
      throw ConfigError("method " + fusion::method_name(m) + " has no ILM estimator to compute");
    out.push_back(m);
    return out;
  }
  for (auto m : fusion::all_methods())
    if (!ilm_only || fusion::is_ilm_method(m)) out.push_back(m);
  return out;
}

data::Vocabulary vocabulary(const ExperimentConfig& c) { return data::Vocabulary::synthetic(c.task.num_labels); }

/// Models needed to decode with a set of methods.
struct ModelBundle {
  std::unique_ptr<model::AedModel> aed;
  std::unique_ptr<model::LanguageModel> lm;
  std::unique_ptr<model::LanguageModel> dr;
  std::vector<std::unique_ptr<ilm::ContextSource>> sources;
  fusion::FusionModels view;
};

ModelBundle load_models(const RunContext& ctx, const std::vector<fusion::Method>& methods, Manifest& manifest) {
  ModelBundle b;
  manifest.input(kAedCkpt, "train-aed");
  b.aed = std::make_unique<model::AedModel>(model::load_aed(full(ctx, kAedCkpt)));
  b.view.aed = b.aed.get();
  for (auto m : methods) {
    if (m != fusion::Method::kNone && !b.lm) {
      manifest.input(kLmCkpt, "train-lm");
      b.lm = std::make_unique<model::LanguageModel>(model::load_lm(full(ctx, kLmCkpt)));
      b.view.external_lm = b.lm.get();
    }
    if (m == fusion::Method::kDensityRatio) {
      manifest.input(kDrCkpt, "train-lm");
      b.dr = std::make_unique<model::LanguageModel>(model::load_lm(full(ctx, kDrCkpt)));
      b.view.density_ratio_lm = b.dr.get();
    }
    if (fusion::is_ilm_method(m)) {
      const std::string rel = estimator_path(m);
      manifest.input(rel, "estimate --method " + fusion::method_name(m));
      b.sources.push_back(std::make_unique<ilm::ContextSource>(ilm::load_estimator(full(ctx, rel), *b.aed)));
      b.view.sources.push_back(b.sources.back().get());
    }
  }
  return b;
}

data::Corpus load_corpus_input(const RunContext& ctx, const char* rel, Manifest& manifest) {
  manifest.input(rel, "gen");
  return data::load_corpus(full(ctx, rel));
}

std::vector<std::vector<std::size_t>> references(const data::Corpus& c) {
  std::vector<std::vector<std::size_t>> refs;
  for (const auto& u : c.utterances) refs.push_back(u.labels);
  return refs;
}

std::vector<std::string> ids(const data::Corpus& c) {
  std::vector<std::string> out;
  for (const auto& u : c.utterances) out.push_back(u.id);
  return out;
}

model::TrainConfig logged(const RunContext& ctx, model::TrainConfig t, const std::string& what) {
  t.on_epoch = [&ctx, what](std::size_t epoch, double loss) {
    log(ctx) << what << " epoch " << epoch + 1 << " loss " << util::format_double(loss) << "\n";
  };
  return t;
}

void note_curve(Manifest& m, const std::string& what, const model::TrainResult& r) {
  for (std::size_t e = 0; e < r.loss_curve.size(); ++e)
    m.note(what + ".loss." + std::to_string(e + 1), util::format_double(r.loss_curve[e]));
}

/// Decodes `corpus` and writes decode/<method>.nbest; returns the WER.
double decode_and_write(const RunContext& ctx, const data::Corpus& corpus, const fusion::FusionModels& models,
                        const fusion::FusionConfig& cfg, Manifest& manifest) {
  auto nbests = fusion::decode_corpus(corpus, models, cfg, ctx.workers);
  util::KeyValues header;
  const auto eff = cfg.effective();
  header.set("method", fusion::method_name(eff.method));
  header.set("lambda1", eff.lambda1);
  header.set("lambda2", eff.lambda2);
  header.set("beam", eff.beam_width);
  const std::string rel = "decode/" + method_slug(eff.method) + ".nbest";
  write_text(ctx, rel, fusion::format_nbest(ids(corpus), nbests, models.aed->vocabulary(), header));
  manifest.output(rel);
  return fusion::word_error_rate(references(corpus), fusion::best_labels(nbests));
}

}  // namespace

void cmd_gen(const RunContext& ctx) {
  const auto& c = ctx.config;
  Manifest manifest(ctx, Command::kGen);
  data::SyntheticTask task(c.task);
  log(ctx) << "generating synthetic task (min label distance " << util::format_double(task.min_mean_distance())
           << ")\n";
  auto train = data::generate_corpus(task, c.train_utts, data::Domain::kSource, stage_seed(c, SeedTag::kTrainCorpus));
  auto dev = data::generate_corpus(task, c.dev_utts, data::Domain::kTarget, stage_seed(c, SeedTag::kDevCorpus));
  auto test = data::generate_corpus(task, c.test_utts, data::Domain::kTarget, stage_seed(c, SeedTag::kTestCorpus));
  auto source_dev =
      data::generate_corpus(task, c.source_dev_utts, data::Domain::kSource, stage_seed(c, SeedTag::kSourceDevCorpus));
  auto target_text =
      data::generate_text(task, c.lm_sentences, data::Domain::kTarget, stage_seed(c, SeedTag::kTargetText));
  auto source_text = data::TextCorpus::from_corpus(train);

  write_text(ctx, kTaskFile, c.task.to_kv().serialize());
  write_text(ctx, kTrainCorpus, data::encode_corpus(train));
  write_text(ctx, kDevCorpus, data::encode_corpus(dev));
  write_text(ctx, kTestCorpus, data::encode_corpus(test));
  write_text(ctx, kSourceDevCorpus, data::encode_corpus(source_dev));
  write_text(ctx, kTargetText, data::encode_text(target_text));
  write_text(ctx, kSourceText, data::encode_text(source_text));
  for (const char* rel : {kTaskFile, kTrainCorpus, kDevCorpus, kTestCorpus, kSourceDevCorpus, kTargetText, kSourceText})
    manifest.output(rel);
  manifest.save();
}

void cmd_train_aed(const RunContext& ctx) {
  Manifest manifest(ctx, Command::kTrainAed);
  auto train = load_corpus_input(ctx, kTrainCorpus, manifest);
  model::AedModel aed(ctx.config.aed, vocabulary(ctx.config));
  log(ctx) << "training AED (" << model::decoder_kind_name(ctx.config.aed.decoder) << " decoder, "
           << aed.params().parameter_count() << " parameters) on " << train.size() << " utterances\n";
  auto result = model::train_aed(train, aed, logged(ctx, ctx.config.aed_train, "aed"));
  prepare(ctx, kAedCkpt);
  model::save_aed(aed, full(ctx, kAedCkpt));
  manifest.output(kAedCkpt);
  note_curve(manifest, "aed", result);
  manifest.save();
}

void cmd_train_lm(const RunContext& ctx) {
  const auto& c = ctx.config;
  Manifest manifest(ctx, Command::kTrainLm);
  manifest.input(kTargetText, "gen");
  manifest.input(kSourceText, "gen");
  auto target = data::load_text(full(ctx, kTargetText));
  auto source = data::load_text(full(ctx, kSourceText));

  model::LanguageModel lm(c.lm, vocabulary(c));
  log(ctx) << "training external LM on " << target.size() << " target-domain sentences\n";
  auto lm_result = model::train_lm(target, lm, logged(ctx, c.lm_train, "lm"));
  prepare(ctx, kLmCkpt);
  model::save_lm(lm, full(ctx, kLmCkpt));
  manifest.output(kLmCkpt);
  note_curve(manifest, "lm", lm_result);

  model::LanguageModel dr(model::LmConfig::decoder_like(c.aed, stage_seed(c, SeedTag::kDrInit)), vocabulary(c));
  log(ctx) << "training decoder-like LM on " << source.size() << " source transcriptions\n";
  auto dr_result = model::train_lm(source, dr, logged(ctx, c.dr_train, "dr"));
  model::save_lm(dr, full(ctx, kDrCkpt));
  manifest.output(kDrCkpt);
  note_curve(manifest, "dr", dr_result);
  manifest.save();
}

void cmd_estimate(const RunContext& ctx) {
  const auto& c = ctx.config;
  Manifest manifest(ctx, Command::kEstimate);
  const auto methods = selected_methods(ctx, true);
  manifest.input(kAedCkpt, "train-aed");
  const model::AedModel aed = model::load_aed(full(ctx, kAedCkpt));
  auto train = load_corpus_input(ctx, kTrainCorpus, manifest);

  std::optional<ilm::CorpusStats> stats;
  for (auto m : methods) {
    std::optional<ilm::ContextSource> source;
    switch (fusion::to_ilm_method(m)) {
      case ilm::Method::kZero: source = ilm::ContextSource::zero(aed.encoder_dim()); break;
      case ilm::Method::kSequenceEncoderAverage:
        source = ilm::ContextSource::sequence_encoder_average(aed.encoder_dim());
        break;
      case ilm::Method::kContextAverage:
      case ilm::Method::kEncoderAverage:
        if (!stats) {
          log(ctx) << "accumulating context and encoder statistics over " << train.size() << " utterances\n";
          stats = ilm::accumulate_stats(train, aed, ctx.workers);
          manifest.note("stats.j_tot", std::to_string(stats->j_tot));
          manifest.note("stats.t_tot", std::to_string(stats->t_tot));
        }
        source = m == fusion::Method::kContextAverage ? ilm::ContextSource::context_average(stats->context_average())
                                                      : ilm::ContextSource::encoder_average(stats->encoder_average());
        break;
      case ilm::Method::kMiniLstm: {
        auto subset = ilm::select_subset(train, c.subset_fraction, stage_seed(c, SeedTag::kMiniSubset));
        auto mini = std::make_shared<ilm::MiniLstm>(
            aed, ilm::MiniLstmConfig{c.mini_hidden, c.aed.init_scale, stage_seed(c, SeedTag::kMiniInit)});
        log(ctx) << "training Mini-LSTM on " << subset.size() << " utterances\n";
        auto result = ilm::train_mini_lstm(subset, aed, *mini, logged(ctx, c.mini_train, "mini-lstm"),
                                           c.zero_at_step_zero);
        note_curve(manifest, "mini", result);
        source = ilm::ContextSource::mini_lstm(std::move(mini));
        break;
      }
    }
    source->set_zero_at_step_zero(c.zero_at_step_zero);
    const std::string rel = estimator_path(m);
    prepare(ctx, rel);
    ilm::save_estimator(*source, aed, full(ctx, rel));
    manifest.output(rel);
  }
  manifest.save();
}

void cmd_tune(const RunContext& ctx) {
  Manifest manifest(ctx, Command::kTune);
  const auto methods = selected_methods(ctx, false);
  auto dev = load_corpus_input(ctx, kDevCorpus, manifest);
  ModelBundle models = load_models(ctx, methods, manifest);
  log(ctx) << "tuning scales on " << dev.size() << " dev utterances for " << methods.size() << " method(s)\n";
  auto results = fusion::grid_search_methods(dev, models.view, methods, ctx.config.grid, ctx.config.fusion, ctx.workers);

  util::KeyValues tuned;
  if (fs::exists(full(ctx, kTuneFile))) tuned = util::KeyValues::load(full(ctx, kTuneFile));
  for (const auto& r : results) {
    const std::string slug = method_slug(r.method);
    tuned.set(slug + ".lambda1", r.lambda1);
    tuned.set(slug + ".lambda2", r.lambda2);
    tuned.set(slug + ".dev_wer", r.wer);
    std::string surface = "lambda1\tlambda2\terrors\twords\twer\n";
    for (const auto& p : r.surface)
      surface += util::format_double(p.lambda1) + "\t" + util::format_double(p.lambda2) + "\t" +
                 std::to_string(p.errors) + "\t" + std::to_string(p.words) + "\t" + util::format_double(p.wer()) +
                 "\n";
    const std::string rel = "results/grid_" + slug + ".tsv";
    write_text(ctx, rel, surface);
    manifest.output(rel);
    log(ctx) << "  " << fusion::method_name(r.method) << ": lambda1=" << util::format_double(r.lambda1)
             << " lambda2=" << util::format_double(r.lambda2) << " dev WER=" << util::format_double(100.0 * r.wer)
             << "%\n";
  }
  write_text(ctx, kTuneFile, tuned.serialize());
  manifest.output(kTuneFile);
  manifest.save();
}

void cmd_decode(const RunContext& ctx) {
  Manifest manifest(ctx, Command::kDecode);
  const auto cfg = ctx.config.fusion.effective();
  auto test = load_corpus_input(ctx, kTestCorpus, manifest);
  ModelBundle models = load_models(ctx, {cfg.method}, manifest);
  log(ctx) << "decoding " << test.size() << " test utterances with " << fusion::method_name(cfg.method) << "\n";
  const double wer = decode_and_write(ctx, test, models.view, cfg, manifest);
  util::KeyValues summary;
  summary.set("method", fusion::method_name(cfg.method));
  summary.set("lambda1", cfg.lambda1);
  summary.set("lambda2", cfg.lambda2);
  summary.set("beam", cfg.beam_width);
  summary.set("test_wer", wer);
  const std::string rel = "results/decode_" + method_slug(cfg.method) + ".kv";
  write_text(ctx, rel, summary.serialize());
  manifest.output(rel);
  if (ctx.out != nullptr) *ctx.out << summary.serialize();
  manifest.save();
}

void cmd_eval(const RunContext& ctx) {
  Manifest manifest(ctx, Command::kEval);
  const auto methods = selected_methods(ctx, false);
  manifest.input(kTuneFile, "tune");
  const auto tuned = util::KeyValues::load(full(ctx, kTuneFile));
  auto test = load_corpus_input(ctx, kTestCorpus, manifest);
  auto source_dev = load_corpus_input(ctx, kSourceDevCorpus, manifest);
  ModelBundle models = load_models(ctx, methods, manifest);

  std::vector<fusion::ResultRow> rows;
  for (auto m : methods) {
    const std::string slug = method_slug(m);
    if (!tuned.contains(slug + ".lambda1"))
      throw MissingArtifactError(std::string(kTuneFile) + " entry for " + fusion::method_name(m),
                                 "tune --method " + fusion::method_name(m));
    fusion::FusionConfig cfg = ctx.config.fusion;
    cfg.method = m;
    cfg.lambda1 = tuned.get_double(slug + ".lambda1", 0.0);
    cfg.lambda2 = tuned.get_double(slug + ".lambda2", 0.0);
    fusion::ResultRow row;
    row.method = m;
    row.lambda1 = cfg.effective().lambda1;
    row.lambda2 = cfg.effective().lambda2;
    row.dev_wer = tuned.get_double(slug + ".dev_wer", 0.0);
    log(ctx) << "evaluating " << fusion::method_name(m) << "\n";
    row.test_wer = decode_and_write(ctx, test, models.view, cfg, manifest);
    if (m == fusion::Method::kDensityRatio)
      row.prior_ppl = fusion::lm_perplexity(data::TextCorpus::from_corpus(source_dev), *models.dr, ctx.workers);
    else if (fusion::is_ilm_method(m))
      row.prior_ppl = ilm::ilm_perplexity(source_dev, *models.view.source(fusion::to_ilm_method(m)), *models.aed,
                                          ctx.workers);
    rows.push_back(row);
  }
  const std::string table = fusion::format_table(rows);
  write_text(ctx, kTableText, table);
  write_text(ctx, kTableKv, fusion::format_table_kv(rows));
  manifest.output(kTableText);
  manifest.output(kTableKv);
  if (ctx.out != nullptr) *ctx.out << table;
  manifest.save();
}

void cmd_pipeline(const RunContext& ctx) {
  Manifest manifest(ctx, Command::kPipeline);
  cmd_gen(ctx);
  cmd_train_aed(ctx);
  cmd_train_lm(ctx);
  RunContext all = ctx;
  all.method.reset();
  cmd_estimate(all);
  cmd_tune(all);
  cmd_eval(all);
  manifest.output(kTableText);
  manifest.output(kTableKv);
  manifest.save();
}

void run_command(Command c, const RunContext& ctx) {
  switch (c) {
    case Command::kGen: return cmd_gen(ctx);
    case Command::kTrainAed: return cmd_train_aed(ctx);
    case Command::kTrainLm: return cmd_train_lm(ctx);
    case Command::kEstimate: return cmd_estimate(ctx);
    case Command::kTune: return cmd_tune(ctx);
    case Command::kDecode: return cmd_decode(ctx);
    case Command::kEval: return cmd_eval(ctx);
    case Command::kPipeline: return cmd_pipeline(ctx);
  }
}

}  // namespace ilmlab::cli
