#include <catch2/catch_amalgamated.hpp>

#include "actinet/models/build.hpp"
#include "actinet/nn/gradcheck.hpp"
#include "actinet/rng.hpp"

using namespace actinet;

namespace {

Tensor random_input(int batch, const FeatShape& shape, std::uint64_t seed) {
  Tensor x(batch, shape.channels, shape.length);
  Rng rng(seed);
  for (double& v : x.v) v = rng.normal(0.0, 1.0);
  return x;
}

Tensor one_hot_targets(int batch, int classes, std::uint64_t seed) {
  Tensor t(batch, classes, 1);
  Rng rng(seed);
  for (int b = 0; b < batch; ++b)
    t.at(b, static_cast<int>(rng.uniform_int(0, classes - 1)), 0) = 1.0;
  return t;
}

}  // namespace

TEST_CASE("gradcheck passes on a small mixed stack") {
  Graph g;
  int n = g.add_input(2, 30);
  n = g.add("conv", std::make_unique<Conv1d>(2, 4, 5), {n});
  n = g.add("relu1", std::make_unique<Relu>(), {n});
  n = g.add("pool", std::make_unique<MaxPool1d>(2, 2), {n});
  n = g.add("dense", std::make_unique<Dense>(4 * 13, 8), {n});
  n = g.add("relu2", std::make_unique<Relu>(), {n});
  n = g.add("out", std::make_unique<Dense>(8, 4), {n});
  g.mark_head("main", n);
  g.init_params(31);

  const Tensor x = random_input(3, g.input_shape(), 7);
  const Tensor t = one_hot_targets(3, 4, 8);
  const auto rep = grad_check(g, x, {t}, {1.0}, 400, 1e-5, 5);
  INFO("max " << rep.max_error << " at " << rep.worst.block << "[" << rep.worst.index
              << "] analytic " << rep.worst.analytic << " numeric " << rep.worst.numeric);
  CHECK(rep.pass(1e-4));
}

TEST_CASE("gradcheck passes for batchnorm in both modes") {
  for (const Mode mode : {Mode::Train, Mode::Eval}) {
    Graph g;
    int n = g.add_input(6, 1);
    n = g.add("d1", std::make_unique<Dense>(6, 8), {n});
    n = g.add("bn", std::make_unique<BatchNorm1d>(8), {n});
    n = g.add("relu", std::make_unique<Relu>(), {n});
    n = g.add("out", std::make_unique<Dense>(8, 4), {n});
    g.mark_head("main", n);
    g.init_params(13);

    const Tensor x = random_input(5, g.input_shape(), 21);
    const Tensor t = one_hot_targets(5, 4, 22);
    const auto rep = grad_check(g, x, {t}, {1.0}, 300, 1e-5, 6, mode);
    INFO((mode == Mode::Train ? "train" : "eval") << " mode, max " << rep.max_error);
    CHECK(rep.pass(1e-4));
  }
}

TEST_CASE("gradcheck detects a corrupted gradient (negative control)") {
  Graph g;
  int n = g.add_input(1, 6);
  n = g.add("d", std::make_unique<Dense>(6, 4), {n});
  g.mark_head("main", n);
  g.init_params(3);

  const Tensor x = random_input(4, g.input_shape(), 17);
  const Tensor t = one_hot_targets(4, 4, 18);

  // Baseline passes.
  CHECK(grad_check(g, x, {t}, {1.0}, 28, 1e-5, 1).pass(1e-4));

  // Corrupt: double every analytic gradient by accumulating backward twice.
  g.zero_grads();
  Graph::Pass p = g.forward(x, Mode::Eval, nullptr);
  Tensor hg;
  softmax_ce_batch(g.head_out(p, 0), t, 1.0, hg);
  g.backward(p, {hg});
  auto params = g.params();
  std::vector<std::vector<double>> doubled;
  for (ParamBlock* blk : params) {
    doubled.push_back(blk->grad);
    for (double& v : doubled.back()) v *= 2.0;
  }
  // Compare doubled analytic against central differences by hand.
  double worst = 0.0;
  Graph::Pass scratch_pass;
  Tensor scratch;
  std::size_t flat = 0;
  for (std::size_t bi = 0; bi < params.size(); ++bi)
    for (std::size_t i = 0; i < params[bi]->value.size(); ++i, ++flat) {
      const double saved = params[bi]->value[i];
      params[bi]->value[i] = saved + 1e-5;
      g.forward(x, Mode::Eval, nullptr, scratch_pass);
      const double lp = softmax_ce_batch(g.head_out(scratch_pass, 0), t, 1.0, scratch);
      params[bi]->value[i] = saved - 1e-5;
      g.forward(x, Mode::Eval, nullptr, scratch_pass);
      const double lm = softmax_ce_batch(g.head_out(scratch_pass, 0), t, 1.0, scratch);
      params[bi]->value[i] = saved;
      const double numeric = (lp - lm) / 2e-5;
      const double bad = doubled[bi][i];
      worst = std::max(worst, std::abs(bad - numeric) /
                                  std::max({std::abs(bad), std::abs(numeric), 0.01}));
    }
  CHECK(worst > 1e-4);  // the corrupted gradients must fail the same test
}

TEST_CASE("linear-only network differentiates at machine precision") {
  Graph g;
  int n = g.add_input(1, 5);
  n = g.add("d1", std::make_unique<Dense>(5, 6), {n});
  n = g.add("d2", std::make_unique<Dense>(6, 3), {n});
  g.mark_head("main", n);
  g.init_params(9);
  const Tensor x = random_input(2, g.input_shape(), 11);

  // Per-head linear objective via raw head gradients: loss = sum(c * y).
  // Analytic gradient of a linear map is exact; finite differences agree to
  // machine-level error.
  Rng rng(12);
  Tensor coeff(2, 3, 1);
  for (double& v : coeff.v) v = rng.normal(0, 1);

  const auto loss_fn = [&]() {
    auto p = g.forward(x, Mode::Eval);
    double s = 0.0;
    const Tensor& y = g.head_out(p, 0);
    for (std::size_t i = 0; i < y.v.size(); ++i) s += coeff.v[i] * y.v[i];
    return s;
  };
  g.zero_grads();
  auto p = g.forward(x, Mode::Eval);
  g.backward(p, {coeff});
  auto params = g.params();
  double worst = 0.0;
  for (ParamBlock* blk : params)
    for (std::size_t i = 0; i < blk->value.size(); ++i) {
      const double saved = blk->value[i];
      blk->value[i] = saved + 1e-5;
      const double lp = loss_fn();
      blk->value[i] = saved - 1e-5;
      const double lm = loss_fn();
      blk->value[i] = saved;
      worst = std::max(worst, std::abs(blk->grad[i] - (lp - lm) / 2e-5));
    }
  CHECK(worst < 1e-8);
}

TEST_CASE("gradcheck refuses stochastic graphs in training mode") {
  Graph g = build_mlp_baseline();
  g.init_params(5);
  const Tensor x = random_input(2, g.input_shape(), 3);
  const Tensor t = one_hot_targets(2, 4, 4);
  CHECK_THROWS_AS(grad_check(g, x, {t}, {1.0}, 10, 1e-5, 1, Mode::Train),
                  std::invalid_argument);
  // Eval mode works (dropout off, batchnorm frozen).
  const auto rep = grad_check(g, x, {t}, {1.0}, 60, 1e-5, 2, Mode::Eval);
  CHECK(rep.pass(1e-4));
}
