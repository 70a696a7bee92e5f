#include <catch2/catch_amalgamated.hpp>

#include "actinet/nn/graph.hpp"
#include "actinet/nn/layers.hpp"
#include "actinet/nn/loss.hpp"
#include "actinet/nn/optimizer.hpp"
#include "actinet/rng.hpp"
#include "oracles.hpp"

using namespace actinet;

namespace {

Tensor tensor_from(const std::vector<std::vector<double>>& rows) {
  Tensor t(1, static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (std::size_t c = 0; c < rows.size(); ++c)
    for (std::size_t i = 0; i < rows[c].size(); ++i)
      t.at(0, static_cast<int>(c), static_cast<int>(i)) = rows[c][i];
  return t;
}

}  // namespace

TEST_CASE("conv1d trivial kernels") {
  SECTION("delta kernel selects elements") {
    Conv1d conv(1, 1, 2);
    conv.params()[0]->value = {1.0, 0.0};  // w[k=0,f=0,n]
    conv.params()[1]->value = {0.0};
    const Tensor in = tensor_from({{1, 2, 3, 4}});
    Tensor out;
    Trace tr;
    conv.forward({&in}, Mode::Eval, nullptr, out, tr);
    REQUIRE(out.length == 3);
    CHECK(out.at(0, 0, 0) == 1.0);
    CHECK(out.at(0, 0, 1) == 2.0);
    CHECK(out.at(0, 0, 2) == 3.0);
  }
  SECTION("zero input passes the bias through") {
    Conv1d conv(2, 3, 4);
    Rng rng(5);
    for (double& w : conv.params()[0]->value) w = rng.normal(0, 1);
    conv.params()[1]->value = {0.5, -1.5, 2.0};
    Tensor in(2, 2, 10);
    Tensor out;
    Trace tr;
    conv.forward({&in}, Mode::Eval, nullptr, out, tr);
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < out.length; ++i)
          CHECK(out.at(b, k, i) == conv.params()[1]->value[k]);
  }
  SECTION("input shorter than the kernel is a shape error") {
    Conv1d conv(1, 1, 8);
    CHECK_THROWS_AS(conv.infer({FeatShape{1, 7}}), std::invalid_argument);
  }
}

TEST_CASE("conv1d matches the literal triple-sum oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int t = static_cast<int>(rng.uniform_int(5, 50));
    const int f = static_cast<int>(rng.uniform_int(1, 3));
    const int k = static_cast<int>(rng.uniform_int(1, 4));
    const int n = static_cast<int>(rng.uniform_int(1, std::min(t, 7)));
    const int stride = static_cast<int>(rng.uniform_int(1, 3));
    Conv1d conv(f, k, n, stride);
    std::vector<double>& w = conv.params()[0]->value;
    std::vector<double>& b = conv.params()[1]->value;
    for (double& x : w) x = rng.normal(0, 1);
    for (double& x : b) x = rng.normal(0, 1);
    std::vector<std::vector<double>> rows(f, std::vector<double>(t));
    for (auto& row : rows)
      for (double& x : row) x = rng.normal(0, 1);

    const Tensor in = tensor_from(rows);
    Tensor out;
    Trace tr;
    conv.forward({&in}, Mode::Eval, nullptr, out, tr);
    const auto z = oracle::conv1d(rows, w, b, f, k, n, stride);
    REQUIRE(out.channels == k);
    REQUIRE(out.length == static_cast<int>(z[0].size()));
    for (int kk = 0; kk < k; ++kk)
      for (int i = 0; i < out.length; ++i)
        REQUIRE(out.at(0, kk, i) == Catch::Approx(z[kk][i]).margin(1e-12));
  }
}

TEST_CASE("maxpool forward and backward routing") {
  SECTION("window max: [1,3,2,5] w2 s2 -> [3,5]") {
    MaxPool1d pool(2, 2);
    const Tensor in = tensor_from({{1, 3, 2, 5}});
    Tensor out;
    Trace tr;
    pool.forward({&in}, Mode::Eval, nullptr, out, tr);
    REQUIRE(out.length == 2);
    CHECK(out.at(0, 0, 0) == 3.0);
    CHECK(out.at(0, 0, 1) == 5.0);
  }
  SECTION("constant input stays constant") {
    MaxPool1d pool(3, 2);
    const Tensor in = tensor_from({{7, 7, 7, 7, 7, 7, 7}});
    Tensor out;
    Trace tr;
    pool.forward({&in}, Mode::Eval, nullptr, out, tr);
    for (int i = 0; i < out.length; ++i) CHECK(out.at(0, 0, i) == 7.0);
  }
  SECTION("random input against the oracle; gradient mass is conserved") {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      const int t = static_cast<int>(rng.uniform_int(3, 40));
      const int width = static_cast<int>(rng.uniform_int(1, std::min(t, 6)));
      const int stride = static_cast<int>(rng.uniform_int(1, 4));
      std::vector<double> row(t);
      for (double& x : row) x = rng.normal(0, 1);
      MaxPool1d pool(width, stride);
      const Tensor in = tensor_from({row});
      Tensor out;
      Trace tr;
      pool.forward({&in}, Mode::Eval, nullptr, out, tr);
      const auto exp = oracle::maxpool(row, width, stride);
      REQUIRE(out.length == static_cast<int>(exp.size()));
      for (int i = 0; i < out.length; ++i) REQUIRE(out.at(0, 0, i) == exp[i]);

      Tensor dout(1, 1, out.length);
      double upstream = 0.0;
      for (int i = 0; i < out.length; ++i) {
        dout.at(0, 0, i) = rng.uniform(0.1, 1.0);  // positive: no cancellation
        upstream += dout.at(0, 0, i);
      }
      Tensor din(1, 1, t);
      std::vector<Tensor*> grads{&din};
      pool.backward({&in}, out, tr, dout, grads);
      double routed = 0.0;
      for (double v : din.v) routed += v;
      CHECK(routed == Catch::Approx(upstream).epsilon(1e-12));
    }
  }
  SECTION("bad configuration") {
    CHECK_THROWS_AS(MaxPool1d(0, 1), std::invalid_argument);
  }
}

TEST_CASE("relu, softmax, cross entropy") {
  SECTION("relu clamps negatives") {
    Relu relu;
    const Tensor in = tensor_from({{-1, 0, 2}});
    Tensor out;
    Trace tr;
    relu.forward({&in}, Mode::Eval, nullptr, out, tr);
    CHECK(out.v == std::vector<double>{0, 0, 2});
  }
  SECTION("softmax of a constant vector is uniform") {
    const auto p = softmax({0, 0, 0, 0});
    for (double x : p) CHECK(x == Catch::Approx(0.25));
  }
  SECTION("softmax is shift invariant and a valid distribution") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(4), y(4);
      const double c = rng.normal(0, 50);
      for (int i = 0; i < 4; ++i) {
        x[i] = rng.normal(0, 10);
        y[i] = x[i] + c;
      }
      const auto px = softmax(x), py = softmax(y);
      double sum = 0.0;
      for (int i = 0; i < 4; ++i) {
        CHECK(px[i] == Catch::Approx(py[i]).margin(1e-12));
        CHECK(px[i] >= 0.0);
        sum += px[i];
      }
      CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    }
  }
  SECTION("cross entropy analytic values") {
    CHECK(cross_entropy({0.25, 0.25, 0.25, 0.25}, {0, 1, 0, 0}) ==
          Catch::Approx(std::log(4.0)));
    CHECK(cross_entropy({0, 1, 0, 0}, {0, 1, 0, 0}) == Catch::Approx(0.0).margin(1e-9));
    CHECK(cross_entropy({0.5, 0.5}, {0.5, 0.5}) == Catch::Approx(std::log(2.0)));
    CHECK_THROWS_AS(cross_entropy({-0.1, 1.1}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(cross_entropy({0.5, 0.5}, {0.5}), std::invalid_argument);
  }
  SECTION("cross entropy is never negative") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> logits(4), t(4, 0.0);
      for (double& v : logits) v = rng.normal(0, 5);
      t[static_cast<int>(rng.uniform_int(0, 3))] = 1.0;
      CHECK(cross_entropy(softmax(logits), t) >= 0.0);
    }
  }
}

TEST_CASE("sgd with momentum") {
  const auto make_block = [](std::vector<double> v) {
    ParamBlock b;
    b.name = "w";
    b.value = std::move(v);
    b.grad.assign(b.value.size(), 0.0);
    return b;
  };

  SECTION("zero gradient and zero velocity leave parameters unchanged") {
    ParamBlock b = make_block({1.0, -2.0});
    OptimizerState st;
    st.learning_rate = 0.1;
    st.attach({&b});
    sgd_momentum_step({&b}, st);
    CHECK(b.value == std::vector<double>{1.0, -2.0});
  }
  SECTION("momentum 0 reproduces vanilla descent bit-for-bit") {
    ParamBlock a = make_block({0.3, -0.7, 2.0});
    ParamBlock b = make_block({0.3, -0.7, 2.0});
    a.grad = b.grad = {0.11, -0.5, 3.0};
    OptimizerState st;
    st.learning_rate = 0.05;
    st.momentum = 0.0;
    st.attach({&a});
    sgd_momentum_step({&a}, st);
    for (std::size_t i = 0; i < b.value.size(); ++i)
      REQUIRE(a.value[i] == b.value[i] - 0.05 * b.grad[i]);
  }
  SECTION("two steps with constant gradient displace by -lr*g*(2+momentum)") {
    ParamBlock b = make_block({1.0});
    b.grad = {2.0};
    OptimizerState st;
    st.learning_rate = 0.1;
    st.momentum = 0.9;
    st.attach({&b});
    sgd_momentum_step({&b}, st);
    sgd_momentum_step({&b}, st);
    CHECK(b.value[0] == Catch::Approx(1.0 - 0.1 * 2.0 * (2.0 + 0.9)));
  }
  SECTION("shape mismatch is an error") {
    ParamBlock b = make_block({1.0, 2.0});
    OptimizerState st;
    st.attach({&b});
    b.grad.resize(3);
    CHECK_THROWS_AS(sgd_momentum_step({&b}, st), std::invalid_argument);
  }
}

TEST_CASE("graph backward basics") {
  SECTION("zero upstream gradient yields zero parameter gradients") {
    Graph g;
    int n = g.add_input(1, 8);
    n = g.add("d1", std::make_unique<Dense>(8, 4), {n});
    g.mark_head("main", n);
    g.init_params(3);
    Tensor x(2, 1, 8);
    Rng rng(4);
    for (double& v : x.v) v = rng.normal(0, 1);
    auto p = g.forward(x, Mode::Train);
    Tensor zero(2, 4, 1);
    g.zero_grads();
    g.backward(p, {zero});
    for (ParamBlock* blk : g.params())
      for (double gr : blk->grad) CHECK(gr == 0.0);
  }

  SECTION("hand-computed single dense layer gradients") {
    // y = W^T x + b with W 2x2; loss = y0*2 + y1*(-1) via raw head grads.
    Graph g;
    int n = g.add_input(1, 2);
    n = g.add("d", std::make_unique<Dense>(2, 2), {n});
    g.mark_head("main", n);
    auto params = g.params();
    params[0]->value = {1.0, 2.0, 3.0, 4.0};  // w[i][o] layout
    params[1]->value = {0.5, -0.5};
    Tensor x(1, 1, 2);
    x.at(0, 0, 0) = 5.0;
    x.at(0, 0, 1) = 7.0;
    auto p = g.forward(x, Mode::Train);
    // forward: y0 = 5*1 + 7*3 + 0.5 = 26.5 ; y1 = 5*2 + 7*4 - 0.5 = 37.5
    CHECK(g.head_out(p, 0).at(0, 0, 0) == Catch::Approx(26.5));
    CHECK(g.head_out(p, 0).at(0, 1, 0) == Catch::Approx(37.5));
    Tensor dy(1, 2, 1);
    dy.at(0, 0, 0) = 2.0;
    dy.at(0, 1, 0) = -1.0;
    g.zero_grads();
    g.backward(p, {dy});
    // dW[i][o] = x_i * dy_o ; db = dy
    CHECK(params[0]->grad == std::vector<double>{10.0, -5.0, 14.0, -7.0});
    CHECK(params[1]->grad == std::vector<double>{2.0, -1.0});
  }

  SECTION("branch points sum gradients") {
    // Input -> dense A; A feeds two heads; gradient at A is the sum.
    Graph g;
    const int in = g.add_input(1, 3);
    const int a = g.add("a", std::make_unique<Dense>(3, 2), {in});
    const int h1 = g.add("h1", std::make_unique<Dense>(2, 2), {a});
    const int h2 = g.add("h2", std::make_unique<Dense>(2, 2), {a});
    g.mark_head("one", h1);
    g.mark_head("two", h2);
    g.init_params(1);
    Tensor x(1, 1, 3);
    x.at(0, 0, 0) = 1.0;
    x.at(0, 0, 1) = -1.0;
    x.at(0, 0, 2) = 0.5;

    // Gradients from each head separately, then both; expect additivity.
    Tensor g1(1, 2, 1), g2(1, 2, 1), zero(1, 2, 1);
    g1.at(0, 0, 0) = 1.0;
    g2.at(0, 1, 0) = -2.0;

    auto grads_for = [&](const Tensor& ga, const Tensor& gb) {
      auto p = g.forward(x, Mode::Train);
      g.zero_grads();
      g.backward(p, {ga, gb});
      std::vector<double> flat;
      for (ParamBlock* blk : g.params())
        flat.insert(flat.end(), blk->grad.begin(), blk->grad.end());
      return flat;
    };
    const auto only1 = grads_for(g1, zero);
    const auto only2 = grads_for(zero, g2);
    const auto both = grads_for(g1, g2);
    for (std::size_t i = 0; i < both.size(); ++i)
      REQUIRE(both[i] == Catch::Approx(only1[i] + only2[i]).margin(1e-12));
  }
}

TEST_CASE("batchnorm statistics") {
  BatchNorm1d bn(2);
  Tensor x(4, 2, 1);
  Rng rng(17);
  for (double& v : x.v) v = rng.normal(3.0, 2.0);

  SECTION("training mode normalizes each channel over the batch") {
    Tensor out;
    Trace tr;
    bn.forward({&x}, Mode::Train, nullptr, out, tr);
    for (int c = 0; c < 2; ++c) {
      double m = 0, v2 = 0;
      for (int b = 0; b < 4; ++b) m += out.at(b, c, 0);
      m /= 4;
      for (int b = 0; b < 4; ++b) v2 += (out.at(b, c, 0) - m) * (out.at(b, c, 0) - m);
      v2 /= 4;
      CHECK(m == Catch::Approx(0.0).margin(1e-9));
      CHECK(v2 == Catch::Approx(1.0).epsilon(1e-3));  // epsilon in denominator
    }
  }
  SECTION("inference uses running statistics and is affine") {
    // Train once to move the running stats, then check eval determinism.
    Tensor out;
    Trace tr;
    bn.forward({&x}, Mode::Train, nullptr, out, tr);
    Tensor din(4, 2, 1);
    std::vector<Tensor*> d{&din};
    bn.backward({&x}, out, tr, out, d);  // any upstream; advances running stats
    Tensor e1, e2;
    Trace t1, t2;
    bn.forward({&x}, Mode::Eval, nullptr, e1, t1);
    bn.forward({&x}, Mode::Eval, nullptr, e2, t2);
    CHECK(e1.v == e2.v);
  }
}

TEST_CASE("dropout scaling and determinism") {
  Dropout drop(0.5);
  Tensor x(1, 1, 10000);
  x.fill(1.0);
  Tensor out;
  Trace tr;
  SECTION("eval mode is the identity") {
    drop.forward({&x}, Mode::Eval, nullptr, out, tr);
    CHECK(out.v == x.v);
  }
  SECTION("training needs an rng and preserves the mean in expectation") {
    CHECK_THROWS_AS(drop.forward({&x}, Mode::Train, nullptr, out, tr),
                    std::invalid_argument);
    Rng rng(21);
    drop.forward({&x}, Mode::Train, &rng, out, tr);
    double mean = 0.0;
    for (double v : out.v) mean += v;
    mean /= static_cast<double>(out.v.size());
    CHECK(mean == Catch::Approx(1.0).epsilon(0.05));
    for (double v : out.v) CHECK((v == 0.0 || v == 2.0));
  }
  SECTION("keep probability is validated") {
    CHECK_THROWS_AS(Dropout(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Dropout(1.5), std::invalid_argument);
  }
}

TEST_CASE("concat and center pick") {
  Graph g;
  const int in = g.add_input(1, 5);
  const int center = g.add("c", std::make_unique<CenterPick>(2), {in});
  const int d = g.add("d", std::make_unique<Dense>(5, 3), {in});
  const int cat = g.add("cat", std::make_unique<Concat>(), {d, center});
  g.mark_head("main", cat);
  g.init_params(2);
  REQUIRE(g.head_shape(0).channels == 4);

  Tensor x(1, 1, 5);
  for (int i = 0; i < 5; ++i) x.at(0, 0, i) = 10.0 + i;
  auto p = g.forward(x, Mode::Eval);
  // Last channel of the concat output is the picked center value.
  CHECK(g.head_out(p, 0).at(0, 3, 0) == 12.0);
}
