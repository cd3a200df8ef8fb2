#include "ilmlab/model/lm.hpp"

#include "ilmlab/util/error.hpp"

namespace ilmlab::model {

using num::Var;

std::string lm_role_name(LmRole r) { return r == LmRole::kExternal ? "external" : "decoder-like"; }

LmRole parse_lm_role(const std::string& name) {
  if (name == "external") return LmRole::kExternal;
  if (name == "decoder-like") return LmRole::kDecoderLike;
  throw ConfigError("unknown LM role '" + name + "' (expected external or decoder-like)");
}

util::KeyValues LmConfig::to_kv() const {
  util::KeyValues kv;
  kv.set("vocab_size", vocab_size);
  kv.set("embedding_dim", embedding_dim);
  kv.set("hidden", hidden);
  kv.set("layers", layers);
  kv.set("kind", decoder_kind_name(kind));
  kv.set("context_k", context_k);
  kv.set("role", lm_role_name(role));
  kv.set("init_scale", init_scale);
  kv.set("seed", static_cast<std::int64_t>(seed));
  return kv;
}

LmConfig LmConfig::from_kv(const util::KeyValues& kv) {
  kv.reject_unknown({"vocab_size", "embedding_dim", "hidden", "layers", "kind", "context_k", "role", "init_scale",
                     "seed"});
  LmConfig c;
  auto size = [&](const char* key, std::size_t fallback) {
    return static_cast<std::size_t>(kv.get_int(key, static_cast<std::int64_t>(fallback)));
  };
  c.vocab_size = size("vocab_size", c.vocab_size);
  c.embedding_dim = size("embedding_dim", c.embedding_dim);
  c.hidden = size("hidden", c.hidden);
  c.layers = size("layers", c.layers);
  c.kind = parse_decoder_kind(kv.get_string("kind", "lstm"));
  c.context_k = size("context_k", c.context_k);
  c.role = parse_lm_role(kv.get_string("role", "external"));
  c.init_scale = kv.get_double("init_scale", c.init_scale);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(c.seed)));
  return c;
}

void LmConfig::validate() const {
  if (vocab_size < data::kFirstLabel + 1) throw ConfigError("vocabulary too small");
  if (embedding_dim == 0 || hidden == 0 || layers == 0) throw ConfigError("LM widths and depth must be positive");
  if (kind == DecoderKind::kFeedForward && context_k == 0) throw ConfigError("FF LM needs context_k >= 1");
}

LmConfig LmConfig::decoder_like(const AedConfig& aed, std::uint64_t seed) {
  LmConfig c;
  c.vocab_size = aed.vocab_size;
  c.embedding_dim = aed.embedding_dim;
  c.hidden = aed.decoder_width;
  c.layers = 1;
  c.kind = aed.decoder;
  c.context_k = aed.context_k;
  c.role = LmRole::kDecoderLike;
  c.init_scale = aed.init_scale;
  c.seed = seed;
  return c;
}

LanguageModel::LanguageModel(LmConfig config, data::Vocabulary vocab) : config_(config), vocab_(std::move(vocab)) {
  config_.validate();
  if (vocab_.size() != config_.vocab_size) throw ConfigError("LM vocabulary size does not match its config");
  util::Rng rng(config_.seed);
  const double s = config_.init_scale;
  const std::size_t e = config_.embedding_dim;
  const std::size_t h = config_.hidden;
  params_.create("lm.embedding", {config_.vocab_size, e}, rng, s);
  if (config_.kind == DecoderKind::kLstm) {
    for (std::size_t l = 0; l < config_.layers; ++l) {
      const std::string p = "lm.L" + std::to_string(l) + ".";
      params_.create(p + "W_in", {l == 0 ? e : h, 4 * h}, rng, s);
      params_.create(p + "W_rec", {h, 4 * h}, rng, s);
      params_.create(p + "bias", {4 * h}, rng, s);
    }
  } else {
    params_.create("lm.ff.W", {config_.context_k * e, h}, rng, s);
    params_.create("lm.ff.bias", {h}, rng, s);
  }
  params_.create("lm.out.W", {h, config_.vocab_size}, rng, s);
  params_.create("lm.out.bias", {config_.vocab_size}, rng, s);
}

namespace {

template <typename Model, typename BindFn>
LmGraph bind_with(num::Tape& tape, Model& lm, BindFn bind) {
  auto& p = lm.params();
  const LmConfig& cfg = lm.config();
  LmGraph g;
  g.model = &lm;
  g.tape = &tape;
  g.embedding = bind(p.get("lm.embedding"));
  if (cfg.kind == DecoderKind::kLstm) {
    for (std::size_t l = 0; l < cfg.layers; ++l) {
      const std::string base = "lm.L" + std::to_string(l) + ".";
      g.layers.push_back({bind(p.get(base + "W_in")), bind(p.get(base + "W_rec")), bind(p.get(base + "bias"))});
    }
  } else {
    g.ff_weight = bind(p.get("lm.ff.W"));
    g.ff_bias = bind(p.get("lm.ff.bias"));
  }
  g.out_weight = bind(p.get("lm.out.W"));
  g.out_bias = bind(p.get("lm.out.bias"));
  return g;
}

}  // namespace

LmGraph bind_trainable(num::Tape& tape, LanguageModel& lm) {
  return bind_with(tape, lm, [&](num::Tensor& t) { return tape.param(t); });
}

LmGraph bind_frozen(num::Tape& tape, const LanguageModel& lm) {
  return bind_with(tape, lm, [&](const num::Tensor& t) { return tape.input(t); });
}

LmVars initial_lm(const LmGraph& g) {
  const LmConfig& cfg = g.model->config();
  LmVars st;
  if (cfg.kind == DecoderKind::kLstm) {
    for (std::size_t l = 0; l < cfg.layers; ++l) {
      st.h.push_back(g.tape->constant({cfg.hidden}, std::vector<double>(cfg.hidden, 0.0)));
      st.cell.push_back(g.tape->constant({cfg.hidden}, std::vector<double>(cfg.hidden, 0.0)));
    }
  } else {
    st.history.assign(cfg.context_k, data::kBos);
  }
  return st;
}

std::pair<LmVars, Var> lm_step(const LmGraph& g, const LmVars& state, std::size_t y_prev) {
  const LmConfig& cfg = g.model->config();
  if (y_prev >= cfg.vocab_size) throw IndexError("label " + std::to_string(y_prev) + " outside vocabulary");
  LmVars next;
  Var top;
  if (cfg.kind == DecoderKind::kLstm) {
    if (state.h.size() != cfg.layers) throw UsageError("LM state does not match the LM depth");
    Var x = num::row(g.embedding, y_prev);
    for (std::size_t l = 0; l < cfg.layers; ++l) {
      auto out = num::lstm_cell(x, state.h[l], state.cell[l], g.layers[l]);
      next.h.push_back(out.h);
      next.cell.push_back(out.cell);
      x = out.h;
    }
    top = x;
  } else {
    if (state.history.size() != cfg.context_k) throw UsageError("LM state does not match the LM context size");
    next.history.assign(state.history.begin() + 1, state.history.end());
    next.history.push_back(y_prev);
    std::vector<Var> parts;
    for (std::size_t id : next.history) parts.push_back(num::row(g.embedding, id));
    top = num::tanh(num::add_row(num::matmul(num::concat(parts), g.ff_weight), g.ff_bias));
  }
  Var logits = num::add_row(num::matmul(top, g.out_weight), g.out_bias);
  return {std::move(next), num::log_softmax(logits)};
}

Var lm_sequence_log_probs(const LmGraph& g, std::span<const std::size_t> labels) {
  check_labels(labels, g.model->config().vocab_size);
  LmVars state = initial_lm(g);
  std::vector<Var> rows;
  rows.reserve(labels.size() + 1);
  for (std::size_t i = 0; i <= labels.size(); ++i) {
    auto [next, lp] = lm_step(g, state, i == 0 ? data::kBos : labels[i - 1]);
    rows.push_back(lp);
    state = std::move(next);
  }
  return num::stack_rows(rows);
}

LmState initial_lm_state(const LanguageModel& lm) {
  const LmConfig& cfg = lm.config();
  LmState st;
  if (cfg.kind == DecoderKind::kLstm) {
    st.h.assign(cfg.layers, num::Tensor::zeros({cfg.hidden}));
    st.cell.assign(cfg.layers, num::Tensor::zeros({cfg.hidden}));
  } else {
    st.history.assign(cfg.context_k, data::kBos);
  }
  return st;
}

std::pair<LmState, num::Tensor> lm_step(const LmState& state, std::size_t y_prev, const LanguageModel& lm) {
  num::Tape tape(false);
  LmGraph g = bind_frozen(tape, lm);
  LmVars prev;
  for (const auto& h : state.h) prev.h.push_back(tape.input(h));
  for (const auto& c : state.cell) prev.cell.push_back(tape.input(c));
  prev.history = state.history;
  auto [next, lp] = lm_step(g, prev, y_prev);
  LmState out;
  for (Var h : next.h) out.h.push_back(h.to_tensor());
  for (Var c : next.cell) out.cell.push_back(c.to_tensor());
  out.history = std::move(next.history);
  return {std::move(out), lp.to_tensor()};
}

double lm_sequence_logprob(std::span<const std::size_t> labels, const LanguageModel& lm) {
  num::Tape tape(false);
  LmGraph g = bind_frozen(tape, lm);
  auto values = lm_sequence_log_probs(g, labels).values();
  const std::size_t vocab = lm.vocab_size();
  double total = 0.0;
  for (std::size_t i = 0; i <= labels.size(); ++i)
    total += values[i * vocab + (i < labels.size() ? labels[i] : data::kEos)];
  return total;
}

}  // namespace ilmlab::model
