#include "ilmlab/fusion/search.hpp"

#include <algorithm>
#include <cctype>

#include "ilmlab/util/error.hpp"

namespace ilmlab::fusion {

std::string method_name(Method m) {
  switch (m) {
    case Method::kNone: return "none";
    case Method::kShallowFusion: return "SF";
    case Method::kDensityRatio: return "DR";
    default: return ilm::method_name(to_ilm_method(m));
  }
}

Method parse_method(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (s == "none") return Method::kNone;
  if (s == "sf") return Method::kShallowFusion;
  if (s == "dr") return Method::kDensityRatio;
  return from_ilm_method(ilm::parse_method(name));
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {Method::kNone,           Method::kShallowFusion,
                                              Method::kDensityRatio,   Method::kZero,
                                              Method::kEncoderAverage, Method::kContextAverage,
                                              Method::kSequenceEncoderAverage, Method::kMiniLstm};
  return methods;
}

bool is_ilm_method(Method m) {
  return m != Method::kNone && m != Method::kShallowFusion && m != Method::kDensityRatio;
}

ilm::Method to_ilm_method(Method m) {
  switch (m) {
    case Method::kZero: return ilm::Method::kZero;
    case Method::kEncoderAverage: return ilm::Method::kEncoderAverage;
    case Method::kContextAverage: return ilm::Method::kContextAverage;
    case Method::kSequenceEncoderAverage: return ilm::Method::kSequenceEncoderAverage;
    case Method::kMiniLstm: return ilm::Method::kMiniLstm;
    default: throw UsageError("fusion method " + method_name(m) + " is not an ILM estimator");
  }
}

Method from_ilm_method(ilm::Method m) {
  switch (m) {
    case ilm::Method::kZero: return Method::kZero;
    case ilm::Method::kEncoderAverage: return Method::kEncoderAverage;
    case ilm::Method::kContextAverage: return Method::kContextAverage;
    case ilm::Method::kSequenceEncoderAverage: return Method::kSequenceEncoderAverage;
    case ilm::Method::kMiniLstm: return Method::kMiniLstm;
  }
  return Method::kZero;
}

FusionConfig FusionConfig::effective() const {
  FusionConfig c = *this;
  if (c.method == Method::kNone) c.lambda1 = c.lambda2 = 0.0;
  if (c.method == Method::kShallowFusion) c.lambda2 = 0.0;
  return c;
}

void FusionConfig::validate() const {
  if (beam_width == 0) throw ConfigError("beam width must be at least 1");
  if (max_output_len == 0) throw ConfigError("maximum output length must be at least 1");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ConfigError("model scales must be non-negative");
}

const ilm::ContextSource* FusionModels::source(ilm::Method m) const {
  for (const auto* s : sources)
    if (s != nullptr && s->method() == m) return s;
  return nullptr;
}

void FusionModels::check(Method method) const {
  if (aed == nullptr) throw ConfigError("decoding needs an AED model");
  const std::size_t vocab = aed->vocab_size();
  auto same_vocab = [&](const model::LanguageModel* lm, const char* what) {
    if (lm == nullptr) throw ConfigError(std::string("method ") + method_name(method) + " needs the " + what);
    if (lm->vocab_size() != vocab)
      throw ConfigError(std::string("the ") + what + " has vocabulary size " + std::to_string(lm->vocab_size()) +
                        ", the AED has " + std::to_string(vocab));
  };
  if (method != Method::kNone) same_vocab(external_lm, "external LM");
  if (method == Method::kDensityRatio) same_vocab(density_ratio_lm, "density-ratio LM");
  if (is_ilm_method(method)) {
    const auto* s = source(to_ilm_method(method));
    if (s == nullptr) throw ConfigError("method " + method_name(method) + " needs its ILM estimator");
    s->require_resolved(aed->encoder_dim());
  }
}

UtteranceSearch::UtteranceSearch(const FusionModels& models, const num::Tensor& features)
    : models_(models), features_(features), aed_(make_aed_scorer(*models.aed, features)) {
  ilm_.resize(5);
}

StepScorer& UtteranceSearch::lm() {
  if (!lm_) {
    if (models_.external_lm == nullptr) throw ConfigError("no external LM available");
    lm_ = make_lm_scorer(*models_.external_lm);
  }
  return *lm_;
}

StepScorer& UtteranceSearch::prior(Method method) {
  if (method == Method::kDensityRatio) {
    if (!dr_) {
      if (models_.density_ratio_lm == nullptr) throw ConfigError("no density-ratio LM available");
      dr_ = make_lm_scorer(*models_.density_ratio_lm);
    }
    return *dr_;
  }
  const ilm::Method m = to_ilm_method(method);
  auto& slot = ilm_[static_cast<std::size_t>(m)];
  if (!slot) {
    const auto* source = models_.source(m);
    if (source == nullptr) throw ConfigError("no ILM estimator for method " + method_name(method));
    if (source->uses_features() && !enc_) enc_ = model::encode(features_, *models_.aed);
    slot = make_ilm_scorer(*models_.aed, *source, enc_ ? &*enc_ : nullptr);
  }
  return *slot;
}

std::size_t UtteranceSearch::evaluations() const {
  std::size_t n = aed_->evaluations();
  if (lm_) n += lm_->evaluations();
  if (dr_) n += dr_->evaluations();
  for (const auto& s : ilm_)
    if (s) n += s->evaluations();
  return n;
}

StepComponents step_components(UtteranceSearch& search, const Hypothesis& hyp, const FusionConfig& config) {
  if (hyp.finished) throw UsageError("cannot expand a finished hypothesis");
  StepComponents c;
  PrefixTrie& trie = search.trie();
  c.aed = search.aed().log_probs(trie, hyp.node);
  if (config.method != Method::kNone) c.lm = search.lm().log_probs(trie, hyp.node);
  if (config.method == Method::kDensityRatio || is_ilm_method(config.method))
    c.prior = search.prior(config.method).log_probs(trie, hyp.node);
  return c;
}

namespace {

inline double fused(const StepComponents& c, std::size_t v, double l1, double l2) {
  const double lm = c.lm.empty() ? 0.0 : c.lm[v];
  const double prior = c.prior.empty() ? 0.0 : c.prior[v];
  return c.aed[v] + l1 * lm - l2 * prior;
}

Hypothesis extend(UtteranceSearch& search, const Hypothesis& hyp, const StepComponents& c, std::size_t v,
                  const FusionConfig& config) {
  Hypothesis next;
  next.labels = hyp.labels;
  next.score = hyp.score + fused(c, v, config.lambda1, config.lambda2);
  next.aed = hyp.aed + c.aed[v];
  next.lm = hyp.lm + (c.lm.empty() ? 0.0 : c.lm[v]);
  next.prior = hyp.prior + (c.prior.empty() ? 0.0 : c.prior[v]);
  if (v == data::kEos) {
    next.finished = true;
    next.node = hyp.node;
  } else {
    next.labels.push_back(v);
    next.node = search.trie().child(hyp.node, v);
  }
  return next;
}

double rank_key(double score, std::size_t length, bool finished, bool normalize) {
  if (!normalize) return score;
  return score / static_cast<double>(std::max<std::size_t>(1, length + (finished ? 1 : 0)));
}

/// Three-way comparison of `a_prefix + a_tail` and `b_prefix + b_tail`
/// (a missing tail is encoded as SIZE_MAX), shorter first on equal prefix.
int compare_sequences(std::span<const std::size_t> a_prefix, std::size_t a_tail, std::span<const std::size_t> b_prefix,
                      std::size_t b_tail) {
  const std::size_t na = a_prefix.size() + (a_tail != SIZE_MAX ? 1 : 0);
  const std::size_t nb = b_prefix.size() + (b_tail != SIZE_MAX ? 1 : 0);
  auto at = [](std::span<const std::size_t> p, std::size_t tail, std::size_t i) { return i < p.size() ? p[i] : tail; };
  for (std::size_t i = 0; i < std::min(na, nb); ++i) {
    const std::size_t x = at(a_prefix, a_tail, i);
    const std::size_t y = at(b_prefix, b_tail, i);
    if (x != y) return x < y ? -1 : 1;
  }
  if (na != nb) return na < nb ? -1 : 1;
  return 0;
}

/// A beam candidate before materialization: a parent plus one token, or a
/// carried-over finished hypothesis (token == SIZE_MAX).
struct Candidate {
  double score;
  double key;
  std::uint32_t parent;
  std::size_t token;
};

}  // namespace

std::vector<double> fused_step_scores(UtteranceSearch& search, const Hypothesis& hyp, const FusionConfig& config) {
  const FusionConfig cfg = config.effective();
  search.models().check(cfg.method);
  StepComponents c = step_components(search, hyp, cfg);
  std::vector<double> out(c.aed.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = fused(c, v, cfg.lambda1, cfg.lambda2);
  return out;
}

bool ranks_before(const Hypothesis& a, const Hypothesis& b, bool length_normalization) {
  const double ka = rank_key(a.score, a.labels.size(), a.finished, length_normalization);
  const double kb = rank_key(b.score, b.labels.size(), b.finished, length_normalization);
  if (ka != kb) return ka > kb;
  return compare_sequences(a.labels, a.finished ? data::kEos : SIZE_MAX, b.labels,
                           b.finished ? data::kEos : SIZE_MAX) < 0;
}

std::vector<Hypothesis> beam_search(UtteranceSearch& search, const FusionConfig& config) {
  const FusionConfig cfg = config.effective();
  cfg.validate();
  search.models().check(cfg.method);
  const std::size_t vocab = search.models().aed->vocab_size();

  std::vector<Hypothesis> beam(1);
  std::vector<StepComponents> comps;
  std::vector<Candidate> candidates;
  while (!std::all_of(beam.begin(), beam.end(), [](const Hypothesis& h) { return h.finished; })) {
    candidates.clear();
    comps.assign(beam.size(), {});
    for (std::uint32_t b = 0; b < beam.size(); ++b) {
      const Hypothesis& hyp = beam[b];
      if (hyp.finished) {
        candidates.push_back(
            {hyp.score, rank_key(hyp.score, hyp.labels.size(), true, cfg.length_normalization), b, SIZE_MAX});
        continue;
      }
      comps[b] = step_components(search, hyp, cfg);
      const std::size_t n = hyp.labels.size();
      for (std::size_t v = data::kEos; v < vocab; ++v) {
        if (v == data::kEos ? n == 0 : n >= cfg.max_output_len) continue;
        const double score = hyp.score + fused(comps[b], v, cfg.lambda1, cfg.lambda2);
        const bool done = v == data::kEos;
        candidates.push_back(
            {score, rank_key(score, done ? n : n + 1, done, cfg.length_normalization), b, v});
      }
    }
    auto sequence_of = [&](const Candidate& c) -> std::pair<std::span<const std::size_t>, std::size_t> {
      const Hypothesis& p = beam[c.parent];
      return {p.labels, c.token == SIZE_MAX ? data::kEos : c.token};
    };
    auto before = [&](const Candidate& x, const Candidate& y) {
      if (x.key != y.key) return x.key > y.key;
      auto [xp, xt] = sequence_of(x);
      auto [yp, yt] = sequence_of(y);
      return compare_sequences(xp, xt, yp, yt) < 0;
    };
    const std::size_t keep = std::min(cfg.beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      before);
    std::vector<Hypothesis> next;
    next.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
      const Candidate& c = candidates[k];
      if (c.token == SIZE_MAX)
        next.push_back(beam[c.parent]);
      else
        next.push_back(extend(search, beam[c.parent], comps[c.parent], c.token, cfg));
    }
    beam = std::move(next);
  }
  return beam;
}

Hypothesis exhaustive_search(UtteranceSearch& search, const FusionConfig& config, std::size_t max_len) {
  const FusionConfig cfg = config.effective();
  search.models().check(cfg.method);
  if (max_len == 0) throw ConfigError("exhaustive search needs max_len >= 1");
  const std::size_t vocab = search.models().aed->vocab_size();
  const std::size_t labels = vocab - data::kFirstLabel;
  double count = 0.0;
  double power = 1.0;
  for (std::size_t n = 1; n <= max_len; ++n) {
    power *= static_cast<double>(labels);
    count += power;
  }
  if (count > 1e6)
    throw InputError("exhaustive search over " + std::to_string(static_cast<long long>(count)) +
                     " sequences exceeds the limit of 1000000");

  std::optional<Hypothesis> best;
  auto visit = [&](auto&& self, const Hypothesis& hyp) -> void {
    StepComponents c = step_components(search, hyp, cfg);
    if (!hyp.labels.empty()) {
      Hypothesis done = extend(search, hyp, c, data::kEos, cfg);
      if (!best || ranks_before(done, *best, cfg.length_normalization)) best = std::move(done);
    }
    if (hyp.labels.size() == max_len) return;
    for (std::size_t v = data::kFirstLabel; v < vocab; ++v) self(self, extend(search, hyp, c, v, cfg));
  };
  visit(visit, Hypothesis{});
  return *best;
}

Hypothesis force_align(UtteranceSearch& search, std::span<const std::size_t> labels, const FusionConfig& config) {
  const FusionConfig cfg = config.effective();
  search.models().check(cfg.method);
  model::check_labels(labels, search.models().aed->vocab_size());
  Hypothesis hyp;
  for (std::size_t v : labels) hyp = extend(search, hyp, step_components(search, hyp, cfg), v, cfg);
  return extend(search, hyp, step_components(search, hyp, cfg), data::kEos, cfg);
}

}  // namespace ilmlab::fusion
