#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ilmlab/numcore/tape.hpp"

namespace ilmlab::num {

/// Matrix product. A rank-1 `a` of extent k is treated as a 1xk row and the
/// result is rank-1 as well.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// Adds a length-n vector to every row of a [.. x n] var.
Var add_row(Var a, Var bias);
Var sub(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
Var scale(Var a, double factor);

enum class Activation { kTanh, kSigmoid };
Var activation(Var x, Activation kind);
inline Var tanh(Var x) { return activation(x, Activation::kTanh); }
inline Var sigmoid(Var x) { return activation(x, Activation::kSigmoid); }

/// Softmax over the last axis, max-subtracted.
Var softmax(Var x);
/// log(softmax(x)) over the last axis through the same stabilized path.
Var log_softmax(Var x);

/// Max over adjacent pairs of the last axis (pool size 2). Ties route the
/// gradient to the lower index.
Var maxout(Var x);

/// Concatenate along the last axis; all parts must have equal row counts.
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
/// Columns [begin, begin + count) of the last axis.
Var slice(Var x, std::size_t begin, std::size_t count);
/// Row i of a rank-2 var, as a rank-1 var.
Var row(Var x, std::size_t i);
Var stack_rows(std::span<const Var> rows);
Var reshape(Var x, Shape shape);
Var sum(Var x);
/// Single element x[index] as a one-element var.
Var pick(Var x, std::size_t index);

/// Mean negative log-probability of `targets` under the row-wise
/// log-distributions in `logprobs` [n x V]. exp(loss) is the perplexity.
Var cross_entropy(Var logprobs, std::span<const std::size_t> targets);

/// Weights of one LSTM layer: input projection [in x 4H], recurrent
/// projection [H x 4H] and bias [4H]. Gate order is input, forget, cell
/// candidate, output.
struct LstmWeights {
  Var input;
  Var recurrent;
  Var bias;
};

struct LstmOutput {
  Var h;
  Var cell;
};

LstmOutput lstm_cell(Var x, Var h_prev, Var c_prev, const LstmWeights& w);
/// Same cell when x·W_in has already been computed (row of a batched
/// projection over a whole sequence).
LstmOutput lstm_cell_projected(Var x_proj, Var h_prev, Var c_prev, const LstmWeights& w);

}  // namespace ilmlab::num
