#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "grad_cases.hpp"
#include "ilmlab/numcore/optimizer.hpp"
#include "ilmlab/util/error.hpp"

using namespace ilmlab;
using num::Tape;
using num::Tensor;
using num::Var;

namespace {

std::vector<double> values_of(Var v) { return {v.values().begin(), v.values().end()}; }

}  // namespace

TEST_SUITE("numcore") {
  TEST_CASE("tensor rejects malformed construction") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
    CHECK_THROWS_AS(Tensor({0}, {}), DimensionError);
    CHECK_THROWS_AS(Tensor({1}, {std::numeric_limits<double>::quiet_NaN()}), InputError);
    CHECK_THROWS_AS(Tensor({1}, {std::numeric_limits<double>::infinity()}), InputError);
    const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    CHECK(t.at(1, 2) == 6.0);
  }

  TEST_CASE("matmul examples") {
    Tape tape;
    Var eye = tape.constant({2, 2}, {1, 0, 0, 1});
    Var m = tape.constant({2, 2}, {1, 2, 3, 4});
    CHECK(values_of(num::matmul(eye, m)) == std::vector<double>{1, 2, 3, 4});
    Var a = tape.constant({1, 2}, {1, 0});
    Var b = tape.constant({2, 1}, {0, 5});
    CHECK(values_of(num::matmul(a, b)) == std::vector<double>{0});
    CHECK_THROWS_AS(num::matmul(m, tape.constant({3, 1}, {1, 2, 3})), DimensionError);
  }

  TEST_CASE("activations at zero") {
    Tape tape;
    Var z = tape.constant({1}, {0.0});
    CHECK(num::tanh(z).item() == 0.0);
    CHECK(num::sigmoid(z).item() == 0.5);
  }

  TEST_CASE("softmax symmetry and stability") {
    Tape tape;
    CHECK(values_of(num::softmax(tape.constant({2}, {0, 0}))) == std::vector<double>{0.5, 0.5});
    CHECK(values_of(num::softmax(tape.constant({2}, {1000, 1000}))) == std::vector<double>{0.5, 0.5});
    const auto big = values_of(num::log_softmax(tape.constant({2}, {1000, 0})));
    CHECK(std::isfinite(big[1]));
    CHECK(big[1] == doctest::Approx(-1000.0));
  }

  TEST_CASE("exp(log_softmax) equals softmax") {
    util::Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      Tape tape(false);
      Var x = tape.constant(testing::random_tensor({3, 5}, rng, 10.0));
      const auto p = values_of(num::softmax(x));
      const auto lp = values_of(num::log_softmax(x));
      for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(std::exp(lp[i]) - p[i]) < 1e-12);
    }
  }

  TEST_CASE("maxout values and tie routing") {
    Tape tape;
    Tensor x({4}, {1, 3, 2, 2}, true);
    Var out = num::maxout(tape.param(x));
    CHECK(values_of(out) == std::vector<double>{3, 2});

    Tensor tie({2}, {-1, -1}, true);
    Tape t2;
    Var m = num::maxout(t2.param(tie));
    CHECK(m.item() == -1.0);
    t2.backward(num::sum(m));
    // The lower index of a tied pair receives the whole gradient.
    CHECK(tie.grad()[0] == 1.0);
    CHECK(tie.grad()[1] == 0.0);
    CHECK_THROWS_AS(num::maxout(tape.constant({3}, {1, 2, 3})), DimensionError);
  }

  TEST_CASE("zero LSTM parameters and state give a zero output") {
    Tape tape;
    const std::size_t h = 4;
    Var zero_h = tape.constant(Tensor::zeros({h}));
    num::LstmWeights w{tape.constant(Tensor::zeros({3, 4 * h})), tape.constant(Tensor::zeros({h, 4 * h})),
                       tape.constant(Tensor::zeros({4 * h}))};
    auto out = num::lstm_cell(tape.constant(Tensor::filled({3}, 0.7)), zero_h, zero_h, w);
    CHECK(values_of(out.h) == std::vector<double>(h, 0.0));
    CHECK(values_of(out.cell) == std::vector<double>(h, 0.0));
  }

  TEST_CASE("LSTM cell matches hand-computed gate algebra") {
    // Gate order i, f, g, o; pre-activations 0.7, 0.9, 0.5, 0.05.
    Tape tape;
    num::LstmWeights w{tape.constant({1, 4}, {0.5, -0.3, 0.8, 0.1}), tape.constant({1, 4}, {0.2, 0.4, -0.6, 0.3}),
                       tape.constant({4}, {0.1, 1.0, 0.0, -0.2})};
    auto out = num::lstm_cell(tape.constant({1}, {1.0}), tape.constant({1}, {0.5}), tape.constant({1}, {0.2}), w);
    CHECK(std::abs(out.h.item() - 0.2166310030445468) < 1e-14);
    CHECK(std::abs(out.cell.item() - 0.4509709343152528) < 1e-14);
  }

  TEST_CASE("cross entropy of uniform and one-hot distributions") {
    Tape tape;
    Var uniform = num::log_softmax(tape.constant(Tensor::zeros({3, 4})));
    const std::vector<std::size_t> targets = {0, 3, 2};
    CHECK(std::abs(num::cross_entropy(uniform, targets).item() - std::log(4.0)) < 1e-15);
    Var onehot = tape.constant({2, 3}, {0.0, -1e300, -1e300, -1e300, -1e300, 0.0});
    const std::vector<std::size_t> hits = {0, 2};
    CHECK(num::cross_entropy(onehot, hits).item() == 0.0);
    const std::vector<std::size_t> bad = {0, 7};
    CHECK_THROWS_AS(num::cross_entropy(onehot, bad), IndexError);
  }

  TEST_CASE("backward accumulates into parameter gradients") {
    Tensor w({2}, {1.5, -2.0}, true);
    for (int pass = 1; pass <= 2; ++pass) {
      Tape tape;
      tape.backward(num::sum(num::mul(tape.param(w), tape.constant({2}, {3.0, 4.0}))));
      CHECK(w.grad()[0] == 3.0 * pass);
      CHECK(w.grad()[1] == 4.0 * pass);
    }
  }

  TEST_CASE("non-recording tape refuses backward") {
    Tensor w({1}, {1.0}, true);
    Tape tape(false);
    Var loss = num::sum(tape.param(w));
    CHECK_THROWS_AS(tape.backward(loss), UsageError);
  }

  TEST_CASE("backward visits nodes in reverse creation order") {
    Tape tape;
    Tensor w({2}, {0.3, 0.4}, true);
    Var x = tape.param(w);
    num::sum(num::tanh(num::scale(x, 2.0)));
    const auto log = tape.op_log();
    REQUIRE(log.size() == 4);
    CHECK(log[0] == num::OpKind::kLeaf);
    CHECK(log[1] == num::OpKind::kScale);
    CHECK(log[2] == num::OpKind::kTanh);
    CHECK(log[3] == num::OpKind::kSum);
  }

  TEST_CASE("every op matches central finite differences on 20 instances") {
    for (const auto& c : testing::op_cases()) {
      CAPTURE(c.name);
      util::Rng rng(util::derive_seed(99, c.name.size()));
      double worst = 0.0;
      for (int i = 0; i < 20; ++i) {
        auto inst = c.make(rng);
        worst = std::max(worst, testing::check_gradients(inst.inputs, inst.build, 1000 + i).max_rel_error);
      }
      CHECK(worst < 1e-6);
    }
  }

  TEST_CASE("matmul gradient on a random 3x4 by 4x2 instance") {
    util::Rng rng(5);
    auto r = testing::check_gradients({testing::random_tensor({3, 4}, rng), testing::random_tensor({4, 2}, rng)},
                                      [](Tape&, const std::vector<Var>& x) { return num::matmul(x[0], x[1]); }, 7);
    CHECK(r.checked == 20);
    CHECK(r.max_rel_error < 1e-6);
  }

  TEST_CASE("adam with zero learning rate leaves parameters unchanged") {
    Tensor w({3}, {0.1, -0.2, 0.3}, true);
    const auto before = w.data();
    num::Adam adam({&w}, {.learning_rate = 0.0});
    Tape tape;
    tape.backward(num::sum(num::mul(tape.param(w), tape.param(w))));
    adam.step();
    CHECK(w.data() == before);
    CHECK(adam.grad_norm() == 0.0);
  }

  TEST_CASE("adam minimizes a quadratic") {
    Tensor w({2}, {2.0, -3.0}, true);
    num::Adam adam({&w}, {.learning_rate = 0.1});
    for (int i = 0; i < 500; ++i) {
      Tape tape;
      Var x = tape.param(w);
      tape.backward(num::sum(num::mul(x, x)));
      adam.step();
    }
    CHECK(std::abs(w[0]) < 1e-2);
    CHECK(std::abs(w[1]) < 1e-2);
    CHECK(adam.steps_taken() == 500);
  }

  TEST_CASE("gradient clipping bounds the update norm input") {
    Tensor w({2}, {0.0, 0.0}, true);
    num::Adam adam({&w}, {.learning_rate = 0.1, .clip_norm = 1.0});
    Tape tape;
    tape.backward(num::sum(num::mul(tape.param(w), tape.constant({2}, {30.0, 40.0}))));
    CHECK(adam.grad_norm() == doctest::Approx(50.0));
    adam.step();
    CHECK(w.is_valid());
    CHECK(adam.grad_norm() == 0.0);
  }
}
