#include "ilmlab/cli/config.hpp"

#include <set>

#include "ilmlab/util/error.hpp"
#include "ilmlab/util/hash.hpp"
#include "ilmlab/util/random.hpp"

namespace ilmlab::cli {

namespace {

const std::vector<std::string> kAedKeys = {"encoder_layers", "encoder_width", "subsample",  "embedding_dim",
                                           "attention_dim",  "decoder",       "decoder_width", "context_k",
                                           "readout_dim",    "init_scale"};
const std::vector<std::string> kLmKeys = {"embedding_dim", "hidden", "layers", "kind", "context_k", "init_scale"};
const std::vector<std::string> kTrainKeys = {"epochs", "batch_size", "learning_rate", "clip_norm"};
const std::vector<std::string> kStages = {"aed", "lm", "dr", "mini"};

/// Entries under `prefix`, with the prefix stripped.
util::KeyValues section(const util::KeyValues& kv, const std::string& prefix) {
  util::KeyValues out;
  for (const auto& [k, v] : kv.entries())
    if (k.rfind(prefix, 0) == 0) out.set(k.substr(prefix.size()), v);
  return out;
}

std::set<std::string> allowed_keys() {
  std::set<std::string> keys = {"seed",
                                "data.train_utts",
                                "data.dev_utts",
                                "data.test_utts",
                                "data.source_dev_utts",
                                "data.lm_sentences",
                                "ilm.mini_hidden",
                                "ilm.subset_fraction",
                                "ilm.zero_at_step_zero",
                                "fusion.method",
                                "fusion.lambda1",
                                "fusion.lambda2",
                                "fusion.beam",
                                "fusion.max_output_len",
                                "fusion.length_normalization",
                                "grid.lambda1_min",
                                "grid.lambda1_max",
                                "grid.lambda1_step",
                                "grid.lambda2_min",
                                "grid.lambda2_max",
                                "grid.lambda2_step"};
  for (const auto& k : data::TaskParams::keys()) keys.insert("task." + k);
  for (const auto& k : kAedKeys) keys.insert("aed." + k);
  for (const auto& k : kLmKeys) keys.insert("lm." + k);
  for (const auto& s : kStages)
    for (const auto& k : kTrainKeys) keys.insert("train." + s + "." + k);
  return keys;
}

std::size_t get_size(const util::KeyValues& kv, const std::string& key, std::size_t fallback) {
  const auto v = kv.get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw ConfigError("config key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

model::TrainConfig train_defaults(std::size_t epochs, std::size_t batch) {
  model::TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch;
  t.learning_rate = 1e-3;
  return t;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_kv(const util::KeyValues& kv) {
  kv.reject_unknown(allowed_keys());
  ExperimentConfig c;
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  c.train_utts = get_size(kv, "data.train_utts", c.train_utts);
  c.dev_utts = get_size(kv, "data.dev_utts", c.dev_utts);
  c.test_utts = get_size(kv, "data.test_utts", c.test_utts);
  c.source_dev_utts = get_size(kv, "data.source_dev_utts", c.source_dev_utts);
  c.lm_sentences = get_size(kv, "data.lm_sentences", c.lm_sentences);
  if (c.train_utts == 0 || c.dev_utts == 0 || c.test_utts == 0 || c.source_dev_utts == 0 || c.lm_sentences == 0)
    throw ConfigError("every corpus size must be positive");

  util::KeyValues task = section(kv, "task.");
  if (!task.contains("seed")) task.set("seed", static_cast<std::int64_t>(c.seed));
  c.task = data::TaskParams::from_kv(task);

  util::KeyValues aed = section(kv, "aed.");
  aed.set("vocab_size", c.task.num_labels + data::kFirstLabel);
  aed.set("feature_dim", c.task.feature_dim);
  aed.set("seed", static_cast<std::int64_t>(stage_seed(c, SeedTag::kAedInit)));
  c.aed = model::AedConfig::from_kv(aed);
  c.aed.validate();

  util::KeyValues lm = section(kv, "lm.");
  lm.set("vocab_size", c.task.num_labels + data::kFirstLabel);
  lm.set("seed", static_cast<std::int64_t>(stage_seed(c, SeedTag::kLmInit)));
  c.lm = model::LmConfig::from_kv(lm);
  c.lm.role = model::LmRole::kExternal;
  c.lm.validate();

  c.aed_train = model::TrainConfig::from_kv(kv, "train.aed.", train_defaults(15, 8));
  c.aed_train.seed = stage_seed(c, SeedTag::kAedBatches);
  c.lm_train = model::TrainConfig::from_kv(kv, "train.lm.", train_defaults(5, 8));
  c.lm_train.seed = stage_seed(c, SeedTag::kLmBatches);
  c.dr_train = model::TrainConfig::from_kv(kv, "train.dr.", train_defaults(5, 8));
  c.dr_train.seed = stage_seed(c, SeedTag::kDrBatches);
  c.mini_train = model::TrainConfig::from_kv(kv, "train.mini.", train_defaults(5, 4));
  c.mini_train.seed = stage_seed(c, SeedTag::kMiniBatches);
  for (const auto* t : {&c.aed_train, &c.lm_train, &c.dr_train, &c.mini_train})
    if (t->batch_size == 0) throw ConfigError("training batch_size must be positive");

  c.mini_hidden = get_size(kv, "ilm.mini_hidden", c.mini_hidden);
  c.subset_fraction = kv.get_double("ilm.subset_fraction", c.subset_fraction);
  c.zero_at_step_zero = kv.get_bool("ilm.zero_at_step_zero", c.zero_at_step_zero);
  if (c.mini_hidden == 0) throw ConfigError("ilm.mini_hidden must be positive");
  if (!(c.subset_fraction > 0.0) || c.subset_fraction > 1.0) throw ConfigError("ilm.subset_fraction must lie in (0, 1]");

  c.fusion.method = fusion::parse_method(kv.get_string("fusion.method", "none"));
  c.fusion.lambda1 = kv.get_double("fusion.lambda1", 0.0);
  c.fusion.lambda2 = kv.get_double("fusion.lambda2", 0.0);
  c.fusion.beam_width = get_size(kv, "fusion.beam", c.fusion.beam_width);
  c.fusion.max_output_len = get_size(kv, "fusion.max_output_len", c.fusion.max_output_len);
  c.fusion.length_normalization = kv.get_bool("fusion.length_normalization", false);
  c.fusion.validate();

  c.grid.lambda1_min = kv.get_double("grid.lambda1_min", c.grid.lambda1_min);
  c.grid.lambda1_max = kv.get_double("grid.lambda1_max", c.grid.lambda1_max);
  c.grid.lambda1_step = kv.get_double("grid.lambda1_step", c.grid.lambda1_step);
  c.grid.lambda2_min = kv.get_double("grid.lambda2_min", c.grid.lambda2_min);
  c.grid.lambda2_max = kv.get_double("grid.lambda2_max", c.grid.lambda2_max);
  c.grid.lambda2_step = kv.get_double("grid.lambda2_step", c.grid.lambda2_step);
  c.grid.lambda1_axis(fusion::Method::kMiniLstm);
  c.grid.lambda2_axis(fusion::Method::kMiniLstm);
  return c;
}

util::KeyValues ExperimentConfig::to_kv() const {
  util::KeyValues kv;
  kv.set("seed", static_cast<std::int64_t>(seed));
  kv.set("data.train_utts", train_utts);
  kv.set("data.dev_utts", dev_utts);
  kv.set("data.test_utts", test_utts);
  kv.set("data.source_dev_utts", source_dev_utts);
  kv.set("data.lm_sentences", lm_sentences);
  const auto task_kv = task.to_kv();
  for (const auto& [k, v] : task_kv.entries()) kv.set("task." + k, v);
  const auto aed_kv = aed.to_kv();
  for (const auto& k : kAedKeys) kv.set("aed." + k, aed_kv.require_string(k));
  const auto lm_kv = lm.to_kv();
  for (const auto& k : kLmKeys) kv.set("lm." + k, lm_kv.require_string(k));
  auto put_train = [&](const std::string& stage, const model::TrainConfig& t) {
    kv.set("train." + stage + ".epochs", t.epochs);
    kv.set("train." + stage + ".batch_size", t.batch_size);
    kv.set("train." + stage + ".learning_rate", t.learning_rate);
    kv.set("train." + stage + ".clip_norm", t.clip_norm);
  };
  put_train("aed", aed_train);
  put_train("lm", lm_train);
  put_train("dr", dr_train);
  put_train("mini", mini_train);
  kv.set("ilm.mini_hidden", mini_hidden);
  kv.set("ilm.subset_fraction", subset_fraction);
  kv.set("ilm.zero_at_step_zero", zero_at_step_zero);
  kv.set("fusion.method", fusion::method_name(fusion.method));
  kv.set("fusion.lambda1", fusion.lambda1);
  kv.set("fusion.lambda2", fusion.lambda2);
  kv.set("fusion.beam", fusion.beam_width);
  kv.set("fusion.max_output_len", fusion.max_output_len);
  kv.set("fusion.length_normalization", fusion.length_normalization);
  kv.set("grid.lambda1_min", grid.lambda1_min);
  kv.set("grid.lambda1_max", grid.lambda1_max);
  kv.set("grid.lambda1_step", grid.lambda1_step);
  kv.set("grid.lambda2_min", grid.lambda2_min);
  kv.set("grid.lambda2_max", grid.lambda2_max);
  kv.set("grid.lambda2_step", grid.lambda2_step);
  return kv;
}

std::string ExperimentConfig::hash() const { return util::hex64(util::hash_bytes(to_kv().serialize())); }

std::uint64_t stage_seed(const ExperimentConfig& c, SeedTag tag) {
  return util::derive_seed(c.seed, static_cast<std::uint64_t>(tag));
}

}  // namespace ilmlab::cli
