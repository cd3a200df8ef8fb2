#include "grad_cases.hpp"

#include <cmath>

#include "fixtures.hpp"
#include "ilmlab/ilm/scoring.hpp"
#include "ilmlab/model/train.hpp"

namespace ilmlab::testing {

using num::Tensor;
using num::Var;

namespace {

std::size_t dim(util::Rng& rng, std::size_t lo = 1, std::size_t hi = 4) { return lo + rng.below(hi - lo + 1); }

/// Pairs separated by at least 1e-2 so the finite differences never cross a
/// tie.
Tensor untied_pairs(std::size_t rows, std::size_t pairs, util::Rng& rng) {
  Tensor t = random_tensor({rows, 2 * pairs}, rng);
  auto v = t.mutable_values();
  for (std::size_t i = 0; i + 1 < v.size(); i += 2)
    if (std::abs(v[i] - v[i + 1]) < 1e-2) v[i + 1] = v[i] + (v[i] < 0.5 ? 0.5 : -0.5);
  return t;
}

OpCase binary(const std::string& name, Var (*op)(Var, Var)) {
  return {name, [op](util::Rng& rng) {
            const std::size_t m = dim(rng), n = dim(rng);
            return OpInstance{{random_tensor({m, n}, rng), random_tensor({m, n}, rng)},
                              [op](num::Tape&, const std::vector<Var>& x) { return op(x[0], x[1]); }};
          }};
}

OpCase unary(const std::string& name, Var (*op)(Var), double scale = 2.0) {
  return {name, [op, scale](util::Rng& rng) {
            return OpInstance{{random_tensor({dim(rng), dim(rng)}, rng, scale)},
                              [op](num::Tape&, const std::vector<Var>& x) { return op(x[0]); }};
          }};
}

Var tanh_fn(Var x) { return num::tanh(x); }
Var sigmoid_fn(Var x) { return num::sigmoid(x); }
Var softmax_fn(Var x) { return num::softmax(x); }
Var log_softmax_fn(Var x) { return num::log_softmax(x); }
Var sum_fn(Var x) { return num::sum(x); }

std::vector<OpCase> build_op_cases() {
  std::vector<OpCase> cases;
  cases.push_back({"matmul", [](util::Rng& rng) {
                     const std::size_t m = dim(rng), k = dim(rng), n = dim(rng);
                     return OpInstance{{random_tensor({m, k}, rng), random_tensor({k, n}, rng)},
                                       [](num::Tape&, const std::vector<Var>& x) { return num::matmul(x[0], x[1]); }};
                   }});
  cases.push_back({"matmul_vector", [](util::Rng& rng) {
                     const std::size_t k = dim(rng), n = dim(rng);
                     return OpInstance{{random_tensor({k}, rng), random_tensor({k, n}, rng)},
                                       [](num::Tape&, const std::vector<Var>& x) { return num::matmul(x[0], x[1]); }};
                   }});
  cases.push_back(binary("add", num::add));
  cases.push_back(binary("sub", num::sub));
  cases.push_back(binary("mul", num::mul));
  cases.push_back({"add_row", [](util::Rng& rng) {
                     const std::size_t m = dim(rng), n = dim(rng);
                     return OpInstance{{random_tensor({m, n}, rng), random_tensor({n}, rng)},
                                       [](num::Tape&, const std::vector<Var>& x) { return num::add_row(x[0], x[1]); }};
                   }});
  cases.push_back({"scale", [](util::Rng& rng) {
                     const double f = rng.uniform(-3.0, 3.0);
                     return OpInstance{{random_tensor({dim(rng), dim(rng)}, rng)},
                                       [f](num::Tape&, const std::vector<Var>& x) { return num::scale(x[0], f); }};
                   }});
  cases.push_back(unary("tanh", tanh_fn));
  cases.push_back(unary("sigmoid", sigmoid_fn));
  cases.push_back(unary("softmax", softmax_fn));
  cases.push_back(unary("log_softmax", log_softmax_fn));
  cases.push_back(unary("sum", sum_fn));
  cases.push_back({"maxout", [](util::Rng& rng) {
                     return OpInstance{{untied_pairs(dim(rng), dim(rng), rng)},
                                       [](num::Tape&, const std::vector<Var>& x) { return num::maxout(x[0]); }};
                   }});
  cases.push_back({"concat", [](util::Rng& rng) {
                     const std::size_t m = dim(rng);
                     return OpInstance{
                         {random_tensor({m, dim(rng)}, rng), random_tensor({m, dim(rng)}, rng),
                          random_tensor({m, dim(rng)}, rng)},
                         [](num::Tape&, const std::vector<Var>& x) { return num::concat({x[0], x[1], x[2]}); }};
                   }});
  cases.push_back({"slice", [](util::Rng& rng) {
                     const std::size_t n = dim(rng, 2, 5);
                     const std::size_t begin = rng.below(n);
                     const std::size_t count = 1 + rng.below(n - begin);
                     return OpInstance{{random_tensor({dim(rng), n}, rng)},
                                       [begin, count](num::Tape&, const std::vector<Var>& x) {
                                         return num::slice(x[0], begin, count);
                                       }};
                   }});
  cases.push_back({"row", [](util::Rng& rng) {
                     const std::size_t m = dim(rng);
                     const std::size_t i = rng.below(m);
                     return OpInstance{{random_tensor({m, dim(rng)}, rng)},
                                       [i](num::Tape&, const std::vector<Var>& x) { return num::row(x[0], i); }};
                   }});
  cases.push_back({"stack_rows", [](util::Rng& rng) {
                     const std::size_t n = dim(rng);
                     return OpInstance{
                         {random_tensor({n}, rng), random_tensor({n}, rng), random_tensor({n}, rng)},
                         [](num::Tape&, const std::vector<Var>& x) { return num::stack_rows(x); }};
                   }});
  cases.push_back({"reshape", [](util::Rng& rng) {
                     const std::size_t m = dim(rng), n = dim(rng);
                     return OpInstance{{random_tensor({m, n}, rng)},
                                       [m, n](num::Tape&, const std::vector<Var>& x) {
                                         return num::reshape(x[0], {n, m});
                                       }};
                   }});
  cases.push_back({"pick", [](util::Rng& rng) {
                     const std::size_t n = dim(rng);
                     const std::size_t i = rng.below(n);
                     return OpInstance{{random_tensor({n}, rng)},
                                       [i](num::Tape&, const std::vector<Var>& x) { return num::pick(x[0], i); }};
                   }});
  cases.push_back({"cross_entropy", [](util::Rng& rng) {
                     const std::size_t m = dim(rng), v = dim(rng, 2, 5);
                     std::vector<std::size_t> targets(m);
                     for (auto& t : targets) t = rng.below(v);
                     return OpInstance{{random_tensor({m, v}, rng)},
                                       [targets](num::Tape&, const std::vector<Var>& x) {
                                         return num::cross_entropy(num::log_softmax(x[0]), targets);
                                       }};
                   }});
  cases.push_back({"lstm_cell", [](util::Rng& rng) {
                     const std::size_t in = dim(rng), h = dim(rng);
                     return OpInstance{{random_tensor({in}, rng), random_tensor({h}, rng), random_tensor({h}, rng),
                                        random_tensor({in, 4 * h}, rng), random_tensor({h, 4 * h}, rng),
                                        random_tensor({4 * h}, rng)},
                                       [](num::Tape&, const std::vector<Var>& x) {
                                         auto out = num::lstm_cell(x[0], x[1], x[2], {x[3], x[4], x[5]});
                                         return num::concat({out.h, out.cell});
                                       }};
                   }});
  cases.push_back({"lstm_cell_projected", [](util::Rng& rng) {
                     const std::size_t h = dim(rng);
                     return OpInstance{{random_tensor({4 * h}, rng), random_tensor({h}, rng), random_tensor({h}, rng),
                                        random_tensor({h, 4 * h}, rng), random_tensor({4 * h}, rng)},
                                       [](num::Tape&, const std::vector<Var>& x) {
                                         auto out = num::lstm_cell_projected(x[0], x[1], x[2], {Var{}, x[3], x[4]});
                                         return num::concat({out.h, out.cell});
                                       }};
                   }});
  cases.push_back({"lstm_unroll_2", [](util::Rng& rng) {
                     const std::size_t in = dim(rng), h = dim(rng);
                     return OpInstance{{random_tensor({in}, rng), random_tensor({in}, rng),
                                        random_tensor({in, 4 * h}, rng), random_tensor({h, 4 * h}, rng),
                                        random_tensor({4 * h}, rng)},
                                       [h](num::Tape& tape, const std::vector<Var>& x) {
                                         const num::LstmWeights w{x[2], x[3], x[4]};
                                         Var zero = tape.constant(Tensor::zeros({h}));
                                         auto s1 = num::lstm_cell(x[0], zero, zero, w);
                                         auto s2 = num::lstm_cell(x[1], s1.h, s1.cell, w);
                                         return s2.h;
                                       }};
                   }});
  return cases;
}

model::AedModel grad_model(model::DecoderKind kind, std::uint64_t seed) {
  auto m = tiny_aed(kind, seed);
  m.params().set_requires_grad(true);
  return m;
}

GradCheckResult check_aed(model::AedModel& m, const std::function<Var(num::Tape&, const model::AedGraph&)>& f,
                          std::uint64_t seed) {
  return check_param_gradients(
      m.params().all(),
      [&](num::Tape& tape) {
        auto g = model::bind_trainable(tape, m);
        return f(tape, g);
      },
      6, seed);
}

/// Scalar summary of a var with fixed weights.
Var weigh(num::Tape& tape, Var v, std::uint64_t seed) {
  util::Rng rng(seed);
  return num::sum(num::mul(v, tape.constant(random_tensor(v.shape(), rng))));
}

std::vector<ModelCase> build_model_cases() {
  using model::DecoderKind;
  std::vector<ModelCase> cases;
  cases.push_back({"encoder", [](std::uint64_t seed) {
                     auto m = grad_model(DecoderKind::kLstm, seed);
                     util::Rng rng(seed);
                     const Tensor x = random_tensor({3, 3}, rng);
                     return check_aed(m, [&](num::Tape& t, const model::AedGraph& g) {
                       return weigh(t, model::encode(g, t.input(x)), seed);
                     }, seed);
                   }});
  cases.push_back({"attention", [](std::uint64_t seed) {
                     auto m = grad_model(DecoderKind::kLstm, seed);
                     util::Rng rng(seed);
                     const Tensor h = random_tensor({4, m.encoder_dim()}, rng);
                     const Tensor q = random_tensor({m.config().decoder_width}, rng);
                     const Tensor beta = random_tensor({4}, rng, 0.5);
                     return check_aed(m, [&](num::Tape& t, const model::AedGraph& g) {
                       Var enc = t.input(h);
                       auto att = model::attend(g, enc, model::attention_keys(g, enc), t.input(q), t.input(beta));
                       return weigh(t, num::concat({att.context, att.beta}), seed);
                     }, seed);
                   }});
  cases.push_back({"lstm_decoder_2_steps", [](std::uint64_t seed) {
                     auto m = grad_model(DecoderKind::kLstm, seed);
                     util::Rng rng(seed);
                     const Tensor c1 = random_tensor({m.encoder_dim()}, rng);
                     return check_aed(m, [&](num::Tape& t, const model::AedGraph& g) {
                       auto s0 = model::initial_decoder(g);
                       auto s1 = model::decoder_step(g, s0, data::kBos, t.constant(Tensor::zeros({m.encoder_dim()})));
                       auto s2 = model::decoder_step(g, s1, 3, t.input(c1));
                       return weigh(t, s2.s, seed);
                     }, seed);
                   }});
  cases.push_back({"ff_decoder", [](std::uint64_t seed) {
                     auto m = grad_model(DecoderKind::kFeedForward, seed);
                     util::Rng rng(seed);
                     const Tensor c = random_tensor({m.encoder_dim()}, rng);
                     const std::vector<std::size_t> hist = {2, 4};
                     return check_aed(m, [&](num::Tape& t, const model::AedGraph& g) {
                       return weigh(t, model::ff_decoder_output(g, hist, t.input(c)), seed);
                     }, seed);
                   }});
  cases.push_back({"readout", [](std::uint64_t seed) {
                     auto m = grad_model(DecoderKind::kLstm, seed);
                     util::Rng rng(seed);
                     const Tensor s = random_tensor({m.config().decoder_width}, rng);
                     const Tensor c = random_tensor({m.encoder_dim()}, rng);
                     return check_aed(m, [&](num::Tape& t, const model::AedGraph& g) {
                       return weigh(t, model::readout(g, t.input(s), 3, t.input(c)), seed);
                     }, seed);
                   }});
  for (auto kind : {DecoderKind::kLstm, DecoderKind::kFeedForward}) {
    cases.push_back({"aed_loss_" + model::decoder_kind_name(kind), [kind](std::uint64_t seed) {
                       auto m = grad_model(kind, seed);
                       util::Rng rng(seed);
                       const auto labels = random_labels(rng, m.vocab_size(), 1, 3);
                       const Tensor x = random_tensor({labels.size() + 1, 3}, rng);
                       const auto targets = model::with_end(labels);
                       return check_aed(m, [&](num::Tape& t, const model::AedGraph& g) {
                         return num::cross_entropy(model::sequence_log_probs(g, t.input(x), labels), targets);
                       }, seed);
                     }});
  }
  cases.push_back({"lm_loss", [](std::uint64_t seed) {
                     model::LanguageModel lm(tiny_lm_config(seed), data::Vocabulary::synthetic(4));
                     lm.params().set_requires_grad(true);
                     util::Rng rng(seed);
                     const auto labels = random_labels(rng, lm.vocab_size(), 1, 4);
                     const auto targets = model::with_end(labels);
                     return check_param_gradients(
                         lm.params().all(),
                         [&](num::Tape& t) {
                           auto g = model::bind_trainable(t, lm);
                           return num::cross_entropy(model::lm_sequence_log_probs(g, labels), targets);
                         },
                         6, seed);
                   }});
  cases.push_back({"mini_lstm_ilm_loss", [](std::uint64_t seed) {
                     const auto aed = tiny_aed(DecoderKind::kLstm, seed);
                     auto mini = std::make_shared<ilm::MiniLstm>(aed, ilm::MiniLstmConfig{3, 0.5, seed});
                     mini->params().set_requires_grad(true);
                     const auto source = ilm::ContextSource::mini_lstm(mini);
                     util::Rng rng(seed);
                     const auto labels = random_labels(rng, aed.vocab_size(), 1, 3);
                     const auto targets = model::with_end(labels);
                     return check_param_gradients(
                         mini->params().all(),
                         [&](num::Tape& t) {
                           auto g = model::bind_frozen(t, aed);
                           auto mg = ilm::bind_trainable(t, *mini);
                           auto ig = ilm::make_ilm_graph(g, &mg, source);
                           return num::cross_entropy(ilm::ilm_sequence_log_probs(ig, labels), targets);
                         },
                         8, seed);
                   }});
  return cases;
}

}  // namespace

const std::vector<OpCase>& op_cases() {
  static const std::vector<OpCase> cases = build_op_cases();
  return cases;
}

const std::vector<ModelCase>& model_cases() {
  static const std::vector<ModelCase> cases = build_model_cases();
  return cases;
}

}  // namespace ilmlab::testing
