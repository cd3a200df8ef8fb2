#include "ilmlab/model/aed.hpp"

#include "ilmlab/util/error.hpp"

namespace ilmlab::model {

using num::Var;

std::string decoder_kind_name(DecoderKind k) { return k == DecoderKind::kLstm ? "lstm" : "ff"; }

DecoderKind parse_decoder_kind(const std::string& name) {
  if (name == "lstm") return DecoderKind::kLstm;
  if (name == "ff") return DecoderKind::kFeedForward;
  throw ConfigError("unknown decoder kind '" + name + "' (expected lstm or ff)");
}

util::KeyValues AedConfig::to_kv() const {
  util::KeyValues kv;
  kv.set("vocab_size", vocab_size);
  kv.set("feature_dim", feature_dim);
  kv.set("encoder_layers", encoder_layers);
  kv.set("encoder_width", encoder_width);
  kv.set("subsample", subsample);
  kv.set("embedding_dim", embedding_dim);
  kv.set("attention_dim", attention_dim);
  kv.set("decoder", decoder_kind_name(decoder));
  kv.set("decoder_width", decoder_width);
  kv.set("context_k", context_k);
  kv.set("readout_dim", readout_dim);
  kv.set("init_scale", init_scale);
  kv.set("seed", static_cast<std::int64_t>(seed));
  return kv;
}

AedConfig AedConfig::from_kv(const util::KeyValues& kv) {
  kv.reject_unknown({"vocab_size", "feature_dim", "encoder_layers", "encoder_width", "subsample", "embedding_dim",
                     "attention_dim", "decoder", "decoder_width", "context_k", "readout_dim", "init_scale", "seed"});
  AedConfig c;
  auto size = [&](const char* key, std::size_t fallback) {
    return static_cast<std::size_t>(kv.get_int(key, static_cast<std::int64_t>(fallback)));
  };
  c.vocab_size = size("vocab_size", c.vocab_size);
  c.feature_dim = size("feature_dim", c.feature_dim);
  c.encoder_layers = size("encoder_layers", c.encoder_layers);
  c.encoder_width = size("encoder_width", c.encoder_width);
  c.subsample = size("subsample", c.subsample);
  c.embedding_dim = size("embedding_dim", c.embedding_dim);
  c.attention_dim = size("attention_dim", c.attention_dim);
  c.decoder = parse_decoder_kind(kv.get_string("decoder", "lstm"));
  c.decoder_width = size("decoder_width", c.decoder_width);
  c.context_k = size("context_k", c.context_k);
  c.readout_dim = size("readout_dim", c.readout_dim);
  c.init_scale = kv.get_double("init_scale", c.init_scale);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(c.seed)));
  return c;
}

void AedConfig::validate() const {
  if (vocab_size < data::kFirstLabel + 1) throw ConfigError("vocabulary too small");
  if (feature_dim == 0 || encoder_layers == 0 || encoder_width == 0 || subsample == 0 || embedding_dim == 0 ||
      attention_dim == 0 || decoder_width == 0 || readout_dim == 0)
    throw ConfigError("AED widths, depth and subsampling factor must be positive");
  if (decoder == DecoderKind::kFeedForward && context_k == 0) throw ConfigError("FF decoder needs context_k >= 1");
}

AedModel::AedModel(AedConfig config, data::Vocabulary vocab) : config_(config), vocab_(std::move(vocab)) {
  config_.validate();
  if (vocab_.size() != config_.vocab_size)
    throw ConfigError("vocabulary has " + std::to_string(vocab_.size()) + " tokens, config says " +
                      std::to_string(config_.vocab_size));
  util::Rng rng(config_.seed);
  const double s = config_.init_scale;
  const std::size_t w = config_.encoder_width;
  for (std::size_t l = 0; l < config_.encoder_layers; ++l) {
    const std::size_t in = l == 0 ? config_.feature_dim : 2 * w;
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string p = "enc.L" + std::to_string(l) + "." + dir + ".";
      params_.create(p + "W_in", {in, 4 * w}, rng, s);
      params_.create(p + "W_rec", {w, 4 * w}, rng, s);
      params_.create(p + "bias", {4 * w}, rng, s);
    }
  }
  const std::size_t d_enc = config_.encoder_dim();
  const std::size_t a = config_.attention_dim;
  const std::size_t d = config_.decoder_width;
  const std::size_t e = config_.embedding_dim;
  params_.create("att.W_enc", {d_enc, a}, rng, s);
  params_.create("att.W_query", {d, a}, rng, s);
  params_.create("att.bias", {a}, rng, s);
  params_.create("att.v", {a, 1}, rng, s);
  params_.create("att.gain", {1, 1}, rng, s);
  params_.create("dec.embedding", {config_.vocab_size, e}, rng, s);
  if (config_.decoder == DecoderKind::kLstm) {
    params_.create("dec.lstm.W_in", {e + d_enc, 4 * d}, rng, s);
    params_.create("dec.lstm.W_rec", {d, 4 * d}, rng, s);
    params_.create("dec.lstm.bias", {4 * d}, rng, s);
  } else {
    params_.create("dec.ff.W", {config_.context_k * e + d_enc, d}, rng, s);
    params_.create("dec.ff.bias", {d}, rng, s);
  }
  const std::size_t r = config_.readout_dim;
  params_.create("readout.W_in", {d + e + d_enc, 2 * r}, rng, s);
  params_.create("readout.b_in", {2 * r}, rng, s);
  params_.create("readout.W_out", {r, config_.vocab_size}, rng, s);
  params_.create("readout.b_out", {config_.vocab_size}, rng, s);
}

namespace {

template <typename Model, typename BindFn>
AedGraph bind_with(num::Tape& tape, Model& model, BindFn bind) {
  const AedConfig& cfg = model.config();
  auto& p = model.params();
  AedGraph g;
  g.model = &model;
  g.tape = &tape;
  for (std::size_t l = 0; l < cfg.encoder_layers; ++l) {
    const std::string base = "enc.L" + std::to_string(l) + ".";
    auto layer = [&](const std::string& dir) {
      return num::LstmWeights{bind(p.get(base + dir + ".W_in")), bind(p.get(base + dir + ".W_rec")),
                              bind(p.get(base + dir + ".bias"))};
    };
    g.encoder.push_back({layer("fwd"), layer("bwd")});
  }
  g.att_enc = bind(p.get("att.W_enc"));
  g.att_query = bind(p.get("att.W_query"));
  g.att_bias = bind(p.get("att.bias"));
  g.att_v = bind(p.get("att.v"));
  g.att_gain = bind(p.get("att.gain"));
  g.embedding = bind(p.get("dec.embedding"));
  if (cfg.decoder == DecoderKind::kLstm) {
    g.dec_lstm = {bind(p.get("dec.lstm.W_in")), bind(p.get("dec.lstm.W_rec")), bind(p.get("dec.lstm.bias"))};
  } else {
    g.ff_weight = bind(p.get("dec.ff.W"));
    g.ff_bias = bind(p.get("dec.ff.bias"));
  }
  g.readout_in_w = bind(p.get("readout.W_in"));
  g.readout_in_b = bind(p.get("readout.b_in"));
  g.readout_out_w = bind(p.get("readout.W_out"));
  g.readout_out_b = bind(p.get("readout.b_out"));
  return g;
}

Var zeros(num::Tape& tape, std::size_t n) { return tape.constant({n}, std::vector<double>(n, 0.0)); }

/// Runs one LSTM direction over the rows of a [T x in] var.
std::vector<Var> run_direction(Var input, const num::LstmWeights& w, bool reverse) {
  num::Tape& tape = *input.tape;
  const std::size_t frames = input.shape()[0];
  const std::size_t hidden = w.recurrent.shape()[0];
  Var projected = num::matmul(input, w.input);
  Var h = zeros(tape, hidden);
  Var c = zeros(tape, hidden);
  std::vector<Var> out(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const std::size_t t = reverse ? frames - 1 - k : k;
    auto step = num::lstm_cell_projected(num::row(projected, t), h, c, w);
    h = step.h;
    c = step.cell;
    out[t] = h;
  }
  return out;
}

num::Tensor to_tensor(Var v) { return v.to_tensor(); }

}  // namespace

AedGraph bind_trainable(num::Tape& tape, AedModel& model) {
  return bind_with(tape, model, [&](num::Tensor& t) { return tape.param(t); });
}

AedGraph bind_frozen(num::Tape& tape, const AedModel& model) {
  return bind_with(tape, model, [&](const num::Tensor& t) { return tape.input(t); });
}

Var encode(const AedGraph& g, Var features) {
  const AedConfig& cfg = g.model->config();
  if (features.shape().size() != 2 || features.shape()[0] == 0)
    throw InputError("encode needs a non-empty [frames x features] input");
  if (features.cols() != cfg.feature_dim)
    throw DimensionError("encoder expects feature width " + std::to_string(cfg.feature_dim) + ", got " +
                         num::shape_string(features.shape()));
  Var x = features;
  for (std::size_t l = 0; l < g.encoder.size(); ++l) {
    auto fwd = run_direction(x, g.encoder[l].forward, false);
    auto bwd = run_direction(x, g.encoder[l].backward, true);
    x = num::concat({num::stack_rows(fwd), num::stack_rows(bwd)});
    if (l == 0 && cfg.subsample > 1) {
      std::vector<Var> kept;
      for (std::size_t t = 0; t < x.shape()[0]; t += cfg.subsample) kept.push_back(num::row(x, t));
      x = num::stack_rows(kept);
    }
  }
  return x;
}

Var attention_keys(const AedGraph& g, Var enc) { return num::matmul(enc, g.att_enc); }

AttentionVars attend(const AedGraph& g, Var enc, Var keys, Var query, Var beta) {
  const std::size_t frames = enc.shape()[0];
  if (beta.size() != frames)
    throw DimensionError("attention feedback has length " + std::to_string(beta.size()) + ", encoder has " +
                         std::to_string(frames) + " frames");
  Var q = num::add(num::matmul(query, g.att_query), g.att_bias);
  Var energy = num::matmul(num::tanh(num::add_row(keys, q)), g.att_v);
  Var location = num::matmul(num::reshape(beta, {frames, 1}), g.att_gain);
  Var scores = num::reshape(num::add(energy, location), {frames});
  Var alpha = num::softmax(scores);
  Var context = num::matmul(alpha, enc);
  return {alpha, num::add(beta, alpha), context};
}

DecoderVars initial_decoder(const AedGraph& g) {
  const AedConfig& cfg = g.model->config();
  DecoderVars st;
  st.kind = cfg.decoder;
  st.s = zeros(*g.tape, cfg.decoder_width);
  if (cfg.decoder == DecoderKind::kLstm) {
    st.cell = zeros(*g.tape, cfg.decoder_width);
  } else {
    st.history.assign(cfg.context_k, data::kBos);
  }
  return st;
}

Var ff_decoder_output(const AedGraph& g, std::span<const std::size_t> history, Var c_prev) {
  const AedConfig& cfg = g.model->config();
  if (cfg.decoder != DecoderKind::kFeedForward) throw UsageError("FF decoder step on an LSTM-decoder model");
  if (history.size() != cfg.context_k)
    throw DimensionError("FF decoder needs " + std::to_string(cfg.context_k) + " history labels, got " +
                         std::to_string(history.size()));
  std::vector<Var> parts;
  parts.reserve(history.size() + 1);
  for (std::size_t id : history) {
    if (id >= cfg.vocab_size) throw IndexError("history label " + std::to_string(id) + " outside vocabulary");
    parts.push_back(num::row(g.embedding, id));
  }
  parts.push_back(c_prev);
  return num::tanh(num::add_row(num::matmul(num::concat(parts), g.ff_weight), g.ff_bias));
}

DecoderVars decoder_step(const AedGraph& g, const DecoderVars& prev, std::size_t y_prev, Var c_prev) {
  const AedConfig& cfg = g.model->config();
  if (prev.kind != cfg.decoder) throw UsageError("decoder state kind does not match the model's decoder");
  if (y_prev >= cfg.vocab_size) throw IndexError("label " + std::to_string(y_prev) + " outside vocabulary");
  if (c_prev.size() != cfg.encoder_dim())
    throw DimensionError("context width " + std::to_string(c_prev.size()) + " does not match encoder width " +
                         std::to_string(cfg.encoder_dim()));
  DecoderVars next;
  next.kind = prev.kind;
  if (prev.kind == DecoderKind::kLstm) {
    Var input = num::concat({num::row(g.embedding, y_prev), c_prev});
    auto out = num::lstm_cell(input, prev.s, prev.cell, g.dec_lstm);
    next.s = out.h;
    next.cell = out.cell;
  } else {
    next.history.assign(prev.history.begin() + 1, prev.history.end());
    next.history.push_back(y_prev);
    next.s = ff_decoder_output(g, next.history, c_prev);
  }
  return next;
}

Var readout(const AedGraph& g, Var s, std::size_t y_prev, Var context) {
  Var input = num::concat({s, num::row(g.embedding, y_prev), context});
  Var hidden = num::maxout(num::add_row(num::matmul(input, g.readout_in_w), g.readout_in_b));
  Var logits = num::add_row(num::matmul(hidden, g.readout_out_w), g.readout_out_b);
  return num::log_softmax(logits);
}

Var sequence_log_probs(const AedGraph& g, Var features, std::span<const std::size_t> labels) {
  const AedConfig& cfg = g.model->config();
  check_labels(labels, cfg.vocab_size);
  num::Tape& tape = *g.tape;
  Var enc = encode(g, features);
  Var keys = attention_keys(g, enc);
  DecoderVars state = initial_decoder(g);
  Var c_prev = zeros(tape, cfg.encoder_dim());
  Var beta = zeros(tape, enc.shape()[0]);
  std::vector<Var> rows;
  rows.reserve(labels.size() + 1);
  for (std::size_t i = 0; i <= labels.size(); ++i) {
    const std::size_t y_prev = i == 0 ? data::kBos : labels[i - 1];
    state = decoder_step(g, state, y_prev, c_prev);
    auto att = attend(g, enc, keys, state.s, beta);
    rows.push_back(readout(g, state.s, y_prev, att.context));
    beta = att.beta;
    c_prev = att.context;
  }
  return num::stack_rows(rows);
}

void check_labels(std::span<const std::size_t> labels, std::size_t vocab_size) {
  for (std::size_t id : labels)
    if (id < data::kFirstLabel || id >= vocab_size)
      throw IndexError("label id " + std::to_string(id) + " is not an ordinary label of a vocabulary of size " +
                       std::to_string(vocab_size));
}

EncoderOutput encode(const num::Tensor& features, const AedModel& model) {
  num::Tape tape(false);
  AedGraph g = bind_frozen(tape, model);
  return {to_tensor(encode(g, tape.input(features)))};
}

AttentionState attend(const num::Tensor& query, const num::Tensor& beta, const EncoderOutput& enc,
                      const AedModel& model) {
  num::Tape tape(false);
  AedGraph g = bind_frozen(tape, model);
  Var h = tape.input(enc.h);
  auto att = attend(g, h, attention_keys(g, h), tape.input(query), tape.input(beta));
  return {to_tensor(att.alpha), to_tensor(att.beta), to_tensor(att.context)};
}

DecoderState initial_decoder_state(const AedModel& model) {
  const AedConfig& cfg = model.config();
  DecoderState st;
  st.kind = cfg.decoder;
  st.s = num::Tensor::zeros({cfg.decoder_width});
  if (cfg.decoder == DecoderKind::kLstm)
    st.cell = num::Tensor::zeros({cfg.decoder_width});
  else
    st.history.assign(cfg.context_k, data::kBos);
  return st;
}

DecoderState decoder_step(const DecoderState& state, std::size_t y_prev, const num::Tensor& c_prev,
                          const AedModel& model) {
  num::Tape tape(false);
  AedGraph g = bind_frozen(tape, model);
  DecoderVars prev;
  prev.kind = state.kind;
  prev.s = tape.input(state.s);
  if (state.kind == DecoderKind::kLstm) prev.cell = tape.input(state.cell);
  prev.history = state.history;
  DecoderVars next = decoder_step(g, prev, y_prev, tape.input(c_prev));
  DecoderState out;
  out.kind = next.kind;
  out.s = to_tensor(next.s);
  if (next.kind == DecoderKind::kLstm) out.cell = to_tensor(next.cell);
  out.history = std::move(next.history);
  out.step = state.step + 1;
  return out;
}

DecoderState decoder_step_lstm(const DecoderState& state, std::size_t y_prev, const num::Tensor& c_prev,
                               const AedModel& model) {
  if (state.kind != DecoderKind::kLstm || model.config().decoder != DecoderKind::kLstm)
    throw UsageError("decoder_step_lstm needs an LSTM decoder state and model");
  return decoder_step(state, y_prev, c_prev, model);
}

DecoderState decoder_step_ff(std::span<const std::size_t> history, const num::Tensor& c_prev, const AedModel& model) {
  if (model.config().decoder != DecoderKind::kFeedForward) throw UsageError("decoder_step_ff needs an FF-decoder model");
  num::Tape tape(false);
  AedGraph g = bind_frozen(tape, model);
  DecoderState out;
  out.kind = DecoderKind::kFeedForward;
  out.history.assign(history.begin(), history.end());
  out.s = to_tensor(ff_decoder_output(g, history, tape.input(c_prev)));
  return out;
}

num::Tensor readout(const num::Tensor& s, std::size_t y_prev, const num::Tensor& context, const AedModel& model) {
  num::Tape tape(false);
  AedGraph g = bind_frozen(tape, model);
  if (y_prev >= model.vocab_size()) throw IndexError("label " + std::to_string(y_prev) + " outside vocabulary");
  return to_tensor(readout(g, tape.input(s), y_prev, tape.input(context)));
}

double aed_sequence_logprob(const num::Tensor& features, std::span<const std::size_t> labels, const AedModel& model) {
  num::Tape tape(false);
  AedGraph g = bind_frozen(tape, model);
  Var lp = sequence_log_probs(g, tape.input(features), labels);
  auto values = lp.values();
  const std::size_t vocab = model.vocab_size();
  double total = 0.0;
  for (std::size_t i = 0; i <= labels.size(); ++i) {
    const std::size_t target = i < labels.size() ? labels[i] : data::kEos;
    total += values[i * vocab + target];
  }
  return total;
}

}  // namespace ilmlab::model
