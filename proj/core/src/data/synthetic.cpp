#include "ilmlab/data/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "ilmlab/util/error.hpp"
#include "ilmlab/util/random.hpp"

namespace ilmlab::data {

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

std::uint64_t domain_tag(Domain d) { return d == Domain::kSource ? 0x51ULL : 0x7aULL; }

std::vector<std::size_t> sample_labels(const SyntheticTask& task, Domain domain, util::Rng& rng) {
  const auto& p = task.params();
  const auto& table = task.table(domain);
  const std::size_t length = static_cast<std::size_t>(rng.between(static_cast<int>(p.min_length), static_cast<int>(p.max_length)));
  std::vector<std::size_t> labels;
  labels.reserve(length);
  std::size_t row = 0;
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t index = rng.categorical(table[row]);
    labels.push_back(index + kFirstLabel);
    row = index + 1;
  }
  return labels;
}

std::string make_id(Domain d, std::size_t i, const char* kind) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s-%s-%06zu", d == Domain::kSource ? "src" : "tgt", kind, i);
  return buf;
}

}  // namespace

std::string domain_name(Domain d) { return d == Domain::kSource ? "source" : "target"; }

Domain parse_domain(const std::string& name) {
  if (name == "source") return Domain::kSource;
  if (name == "target") return Domain::kTarget;
  throw ConfigError("unknown domain '" + name + "' (expected source or target)");
}

const std::vector<std::string>& TaskParams::keys() {
  static const std::vector<std::string> k = {
      "num_labels", "feature_dim",  "sigma",          "min_length",     "max_length",
      "min_frames", "max_frames",   "cluster_size",   "cluster_edge",   "cluster_spread",
      "ambiguity_rate", "branching", "peak_mass",     "seed"};
  return k;
}

util::KeyValues TaskParams::to_kv() const {
  util::KeyValues kv;
  kv.set("num_labels", num_labels);
  kv.set("feature_dim", feature_dim);
  kv.set("sigma", sigma);
  kv.set("min_length", min_length);
  kv.set("max_length", max_length);
  kv.set("min_frames", min_frames);
  kv.set("max_frames", max_frames);
  kv.set("cluster_size", cluster_size);
  kv.set("cluster_edge", cluster_edge);
  kv.set("cluster_spread", cluster_spread);
  kv.set("ambiguity_rate", ambiguity_rate);
  kv.set("branching", branching);
  kv.set("peak_mass", peak_mass);
  kv.set("seed", static_cast<std::int64_t>(seed));
  return kv;
}

TaskParams TaskParams::from_kv(const util::KeyValues& kv) {
  kv.reject_unknown({keys().begin(), keys().end()});
  TaskParams p;
  auto size = [&](const char* key, std::size_t fallback) {
    const auto v = kv.get_int(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw ConfigError(std::string("'") + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
  };
  p.num_labels = size("num_labels", p.num_labels);
  p.feature_dim = size("feature_dim", p.feature_dim);
  p.sigma = kv.get_double("sigma", p.sigma);
  p.min_length = size("min_length", p.min_length);
  p.max_length = size("max_length", p.max_length);
  p.min_frames = size("min_frames", p.min_frames);
  p.max_frames = size("max_frames", p.max_frames);
  p.cluster_size = size("cluster_size", p.cluster_size);
  p.cluster_edge = kv.get_double("cluster_edge", p.cluster_edge);
  p.cluster_spread = kv.get_double("cluster_spread", p.cluster_spread);
  p.ambiguity_rate = kv.get_double("ambiguity_rate", p.ambiguity_rate);
  p.branching = size("branching", p.branching);
  p.peak_mass = kv.get_double("peak_mass", p.peak_mass);
  p.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(p.seed)));
  return p;
}

SyntheticTask::SyntheticTask(TaskParams params) : params_(params), vocab_(Vocabulary::synthetic(params.num_labels)) {
  const auto& p = params_;
  if (p.num_labels == 0 || p.feature_dim == 0) throw ConfigError("task needs labels and a feature dimension");
  if (p.sigma < 0.0) throw ConfigError("sigma must be non-negative");
  if (p.min_length > p.max_length) throw ConfigError("min_length exceeds max_length");
  if (p.min_frames == 0 || p.min_frames > p.max_frames) throw ConfigError("frame range must satisfy 1 <= min <= max");
  if (p.cluster_size == 0 || p.cluster_size > p.feature_dim)
    throw ConfigError("cluster_size must be in [1, feature_dim]");
  if (p.ambiguity_rate < 0.0 || p.ambiguity_rate > 1.0) throw ConfigError("ambiguity_rate must be in [0, 1]");
  if (p.peak_mass < 0.0 || p.peak_mass > 1.0) throw ConfigError("peak_mass must be in [0, 1]");

  const std::size_t n_clusters = (p.num_labels + p.cluster_size - 1) / p.cluster_size;
  if (p.branching > n_clusters) throw ConfigError("branching exceeds the number of clusters");

  // Emission model. Redraw the cluster layout until every pair of label
  // means is more than 4 sigma apart.
  util::Rng layout(util::derive_seed(p.seed, 1));
  const double offset = p.cluster_edge / std::sqrt(2.0);
  bool separated = false;
  for (int attempt = 0; attempt < 100 && !separated; ++attempt) {
    centers_.assign(n_clusters, std::vector<double>(p.feature_dim));
    for (auto& c : centers_)
      for (auto& v : c) v = p.cluster_spread * layout.normal();
    means_.assign(p.num_labels, std::vector<double>(p.feature_dim));
    for (std::size_t l = 0; l < p.num_labels; ++l) {
      means_[l] = centers_[l / p.cluster_size];
      if (p.cluster_size > 1) means_[l][l % p.cluster_size] += offset;
    }
    min_distance_ = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < p.num_labels; ++a)
      for (std::size_t b = a + 1; b < p.num_labels; ++b) min_distance_ = std::min(min_distance_, distance(means_[a], means_[b]));
    separated = p.num_labels == 1 || (min_distance_ > 4.0 * p.sigma && min_distance_ > 0.0);
  }
  if (!separated)
    throw ConfigError("could not place label means more than 4 sigma apart; increase cluster_edge or cluster_spread");

  // Bigram tables: shared successor clusters, domain-specific members.
  util::Rng shared(util::derive_seed(p.seed, 2));
  util::Rng src_rng(util::derive_seed(p.seed, 3));
  util::Rng tgt_rng(util::derive_seed(p.seed, 4));
  const double floor = (1.0 - p.peak_mass) / static_cast<double>(p.num_labels);
  source_table_.assign(p.num_labels + 1, std::vector<double>(p.num_labels, floor));
  target_table_ = source_table_;
  for (std::size_t row = 0; row <= p.num_labels; ++row) {
    std::vector<std::size_t> clusters(n_clusters);
    for (std::size_t c = 0; c < n_clusters; ++c) clusters[c] = c;
    shared.shuffle(clusters);
    const double share = p.branching == 0 ? 0.0 : p.peak_mass / static_cast<double>(p.branching);
    for (std::size_t b = 0; b < p.branching; ++b) {
      const std::size_t c = clusters[b];
      const std::size_t first = c * p.cluster_size;
      const std::size_t members = std::min(p.cluster_size, p.num_labels - first);
      const std::size_t src_member = src_rng.below(members);
      std::size_t tgt_member = tgt_rng.below(members);
      if (members > 1 && tgt_member == src_member) tgt_member = (tgt_member + 1 + tgt_rng.below(members - 1)) % members;
      source_table_[row][first + src_member] += share;
      target_table_[row][first + tgt_member] += share;
    }
  }
  for (auto* table : {&source_table_, &target_table_})
    for (auto& row : *table) {
      double total = 0.0;
      for (double v : row) total += v;
      for (double& v : row) v /= total;
    }
}

Corpus generate_corpus(const SyntheticTask& task, std::size_t n_utts, Domain domain, std::uint64_t seed) {
  if (n_utts == 0) throw ConfigError("generate_corpus needs at least one utterance");
  const auto& p = task.params();
  Corpus corpus;
  corpus.feature_dim = p.feature_dim;
  corpus.utterances.reserve(n_utts);
  for (std::size_t i = 0; i < n_utts; ++i) {
    util::Rng rng(util::derive_seed(seed, (domain_tag(domain) << 32) | i));
    Utterance u;
    u.id = make_id(domain, i, "utt");
    u.labels = sample_labels(task, domain, rng);
    std::vector<double> frames;
    std::size_t n_frames = 0;
    for (std::size_t id : u.labels) {
      const std::size_t index = id - kFirstLabel;
      const std::size_t count = static_cast<std::size_t>(rng.between(static_cast<int>(p.min_frames), static_cast<int>(p.max_frames)));
      const bool ambiguous = rng.uniform() < p.ambiguity_rate;
      const auto& base = ambiguous ? task.cluster_centers()[task.cluster_of(index)] : task.means()[index];
      for (std::size_t f = 0; f < count; ++f)
        for (std::size_t d = 0; d < p.feature_dim; ++d) frames.push_back(base[d] + p.sigma * rng.normal());
      n_frames += count;
    }
    if (n_frames == 0) {
      // Empty transcription: a single noise frame keeps the features non-empty.
      for (std::size_t d = 0; d < p.feature_dim; ++d) frames.push_back(p.sigma * rng.normal());
      n_frames = 1;
    }
    u.features = num::Tensor({n_frames, p.feature_dim}, std::move(frames));
    corpus.utterances.push_back(std::move(u));
  }
  return corpus;
}

TextCorpus generate_text(const SyntheticTask& task, std::size_t n_sentences, Domain domain, std::uint64_t seed) {
  if (n_sentences == 0) throw ConfigError("generate_text needs at least one sentence");
  TextCorpus text;
  text.sentences.reserve(n_sentences);
  for (std::size_t i = 0; i < n_sentences; ++i) {
    util::Rng rng(util::derive_seed(seed, (domain_tag(domain) << 32) | (1ULL << 31) | i));
    text.sentences.push_back({make_id(domain, i, "txt"), sample_labels(task, domain, rng)});
  }
  return text;
}

}  // namespace ilmlab::data
