// Copyright 2026 The P2N2 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include "helpers.hpp"
#include "p2n2/checkpoint.hpp"
#include "p2n2/nn.hpp"

#include <cstdio>

using namespace p2n2;

TEST_SUITE_BEGIN("nn");

TEST_CASE("matmul matches the nested-loop oracle") {
  Rng rng(3);
  const Tensor a = testutil::random_tensor(5, 3, rng);
  const Tensor b = testutil::random_tensor(3, 4, rng);
  CHECK(max_abs_diff(matmul(a, b), testutil::naive_matmul(a, b)) < 1e-12);
}

TEST_CASE("dense forward basics") {
  Rng rng(4);
  SUBCASE("zero weights and bias, sigmoid") {
    DenseParams p{Tensor(3, 2), Tensor(1, 2)};
    const Tensor x = testutil::random_tensor(4, 3, rng);
    const Tensor out = dense_forward(x, p, Activation::Sigmoid);
    for (size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == doctest::Approx(0.5));
  }
  SUBCASE("identity weights, linear") {
    DenseParams p{Tensor::identity(3), Tensor(1, 3)};
    const Tensor x = testutil::random_tensor(4, 3, rng);
    const Tensor out = dense_forward(x, p, Activation::Linear);
    CHECK(max_abs_diff(out, x) == 0.0);
  }
  SUBCASE("forward matches the oracle") {
    DenseParams p = init_dense(3, 4, rng);
    const Tensor x = testutil::random_tensor(5, 3, rng);
    const Tensor want = add_row_broadcast(testutil::naive_matmul(x, p.weights), p.bias);
    const Tensor got = dense_forward(x, p, Activation::Linear);
    CHECK(max_abs_diff(got, want) < 1e-12);
  }
}

TEST_CASE("dense backward") {
  Rng rng(5);
  SUBCASE("zero upstream gradient") {
    DenseParams p = init_dense(3, 2, rng);
    const Tensor x = testutil::random_tensor(4, 3, rng);
    DenseCache cache;
    dense_forward(x, p, Activation::Sigmoid, &cache);
    const DenseGrads g = dense_backward(Tensor(4, 2), cache, p, Activation::Sigmoid);
    CHECK(frobenius_norm(g.grad_weights) == 0.0);
    CHECK(frobenius_norm(g.grad_bias) == 0.0);
    CHECK(frobenius_norm(g.grad_input) == 0.0);
  }
  SUBCASE("linear single sample: grad_W = x^T * grad_out") {
    DenseParams p = init_dense(3, 2, rng);
    const Tensor x = testutil::random_tensor(1, 3, rng);
    DenseCache cache;
    dense_forward(x, p, Activation::Linear, &cache);
    Tensor go = testutil::random_tensor(1, 2, rng);
    const DenseGrads g = dense_backward(go, cache, p, Activation::Linear);
    const Tensor want = matmul_tn(x, go);
    CHECK(max_abs_diff(g.grad_weights, want) == 0.0);
  }
}

namespace {

// Scalar probe loss: sum of squares of the layer output.
double probe_loss(const Tensor& out) {
  double s = 0.0;
  for (size_t i = 0; i < out.size(); ++i) s += out.data()[i] * out.data()[i];
  return s;
}

}  // namespace

TEST_CASE("dense gradients match central finite differences") {
  Rng rng(6);
  for (Activation act : {Activation::Sigmoid, Activation::Relu, Activation::Linear}) {
    CAPTURE(activation_name(act));
    DenseParams p = init_dense(3, 2, rng);
    const Tensor x = testutil::random_tensor(4, 3, rng);

    DenseCache cache;
    const Tensor out = dense_forward(x, p, act, &cache);
    Tensor grad_out(out.rows(), out.cols());
    for (size_t i = 0; i < out.size(); ++i) grad_out.data()[i] = 2.0 * out.data()[i];
    const DenseGrads g = dense_backward(grad_out, cache, p, act);

    const double eps = 1e-5;
    for (size_t i = 0; i < p.weights.size(); ++i) {
      auto f = [&](double w) {
        DenseParams q = p;
        q.weights.data()[i] = w;
        return probe_loss(dense_forward(x, q, act));
      };
      const double fd = testutil::central_diff(f, p.weights.data()[i], eps);
      CHECK(testutil::rel_err(g.grad_weights.data()[i], fd, 1e-6) < 1e-4);
    }
    for (size_t i = 0; i < p.bias.size(); ++i) {
      auto f = [&](double b) {
        DenseParams q = p;
        q.bias.data()[i] = b;
        return probe_loss(dense_forward(x, q, act));
      };
      const double fd = testutil::central_diff(f, p.bias.data()[i], eps);
      CHECK(testutil::rel_err(g.grad_bias.data()[i], fd, 1e-6) < 1e-4);
    }
  }
}

TEST_CASE("logistic loss") {
  SUBCASE("analytic value at y_hat = 0.5") {
    Tensor yh(1, 1), y(1, 1);
    yh.at(0, 0) = 0.5;
    y.at(0, 0) = 1.0;
    CHECK(logistic_loss(yh, y).loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }
  SUBCASE("perfect prediction after clamping") {
    Tensor yh(2, 1), y(2, 1);
    yh.at(0, 0) = 1.0;
    y.at(0, 0) = 1.0;
    yh.at(1, 0) = 0.0;
    y.at(1, 0) = 0.0;
    reset_logistic_clamp_count();
    CHECK(logistic_loss(yh, y).loss <= 1e-11);
    CHECK(logistic_clamp_count() == 1);
  }
  SUBCASE("gradient matches finite differences") {
    Rng rng(7);
    Tensor yh(4, 1), y(4, 1);
    for (size_t i = 0; i < 4; ++i) {
      yh.at(i, 0) = rng.uniform(0.05, 0.95);
      y.at(i, 0) = rng.next_below(2) ? 1.0 : 0.0;
    }
    const LossResult r = logistic_loss(yh, y);
    for (size_t i = 0; i < 4; ++i) {
      auto f = [&](double v) {
        Tensor q = yh;
        q.at(i, 0) = v;
        return logistic_loss(q, y).loss;
      };
      const double fd = testutil::central_diff(f, yh.at(i, 0), 1e-6);
      CHECK(testutil::rel_err(r.grad.at(i, 0), fd) < 1e-5);
    }
  }
}

TEST_CASE("mse distance") {
  SUBCASE("identical inputs") {
    Tensor x(2, 2);
    CHECK(mse_distance(x, x).distance == 0.0);
  }
  SUBCASE("analytic 1x1") {
    Tensor x(1, 1), xh(1, 1);
    xh.at(0, 0) = 2.0;
    const DistanceResult r = mse_distance(x, xh);
    CHECK(r.distance == doctest::Approx(4.0));
    CHECK(r.grad.at(0, 0) == doctest::Approx(4.0));
  }
  SUBCASE("gradient matches finite differences") {
    Rng rng(8);
    const Tensor x = testutil::random_tensor(3, 2, rng);
    Tensor xh = testutil::random_tensor(3, 2, rng);
    const DistanceResult r = mse_distance(x, xh);
    for (size_t i = 0; i < xh.size(); ++i) {
      auto f = [&](double v) {
        Tensor q = xh;
        q.data()[i] = v;
        return mse_distance(x, q).distance;
      };
      const double fd = testutil::central_diff(f, xh.data()[i], 1e-6);
      CHECK(testutil::rel_err(r.grad.data()[i], fd, 1e-9) < 1e-6);
    }
  }
}

TEST_CASE("optimizers") {
  SUBCASE("zero gradient leaves parameters alone") {
    Tensor p(2, 2, {1.0, 2.0, 3.0, 4.0});
    Tensor g(2, 2);
    OptimizerState st;
    st.config.kind = OptimizerKind::Adam;
    st.config.learning_rate = 0.1;
    const Tensor before = p;
    optimizer_step({&p}, {&g}, st);
    CHECK(max_abs_diff(p, before) == 0.0);
  }
  SUBCASE("sgd analytic step") {
    Tensor p(1, 1, {1.0});
    Tensor g(1, 1, {0.5});
    OptimizerState st;
    st.config.learning_rate = 0.1;
    optimizer_step({&p}, {&g}, st);
    CHECK(p.at(0, 0) == doctest::Approx(0.95));
  }
  SUBCASE("adam first step is close to -lr") {
    Tensor p(1, 1, {0.0});
    Tensor g(1, 1, {1.0});
    OptimizerState st;
    st.config.kind = OptimizerKind::Adam;
    st.config.learning_rate = 0.01;
    optimizer_step({&p}, {&g}, st);
    // Hand-rolled reference at t=1: m^=g, v^=g^2, step = lr/(1+eps).
    const double want = -0.01 * (1.0 / (1.0 + 1e-8));
    CHECK(p.at(0, 0) == doctest::Approx(want).epsilon(1e-6));
  }
  SUBCASE("global-norm clip rescales the whole group") {
    Tensor p1(1, 1, {0.0}), p2(1, 1, {0.0});
    Tensor g1(1, 1, {3.0}), g2(1, 1, {4.0});  // norm 5
    OptimizerState st;
    st.config.learning_rate = 1.0;
    st.config.clip_norm = 1.0;
    optimizer_step({&p1, &p2}, {&g1, &g2}, st);
    CHECK(p1.at(0, 0) == doctest::Approx(-0.6));
    CHECK(p2.at(0, 0) == doctest::Approx(-0.8));
  }
}

TEST_CASE("sigmoid output range is open") {
  CHECK(sigmoid(1000.0) < 1.0);
  CHECK(sigmoid(-1000.0) > 0.0);
  CHECK(sigmoid(0.0) == doctest::Approx(0.5));
}

TEST_CASE("loss is non-increasing under small-step sgd on a smooth net") {
  Rng rng(9);
  Mlp net({{4, 6, Activation::Sigmoid}, {6, 1, Activation::Sigmoid}}, rng);
  const Tensor x = testutil::random_tensor(16, 4, rng);
  Tensor y(16, 1);
  for (size_t i = 0; i < 16; ++i) y.at(i, 0) = rng.next_below(2) ? 1.0 : 0.0;

  OptimizerState st;
  st.config.learning_rate = 1e-4;
  int non_monotone = 0;
  double prev = 1e300;
  for (int step = 0; step < 10; ++step) {
    std::vector<DenseCache> caches;
    const Tensor yh = net.forward(x, &caches);
    const LossResult loss = logistic_loss(yh, y);
    if (loss.loss > prev) ++non_monotone;
    prev = loss.loss;
    std::vector<DenseGrads> grads;
    net.backward(loss.grad, caches, &grads);
    net.apply(grads, st);
  }
  CHECK(non_monotone <= 1);
}

TEST_CASE("mlp backward matches finite differences end to end") {
  Rng rng(10);
  Mlp net({{3, 4, Activation::Relu}, {4, 2, Activation::Sigmoid}}, rng);
  const Tensor x = testutil::random_tensor(5, 3, rng);

  std::vector<DenseCache> caches;
  const Tensor out = net.forward(x, &caches);
  Tensor go(out.rows(), out.cols());
  for (size_t i = 0; i < out.size(); ++i) go.data()[i] = 2.0 * out.data()[i];
  std::vector<DenseGrads> grads;
  net.backward(go, caches, &grads);

  auto params = net.param_tensors();
  for (size_t layer = 0; layer < net.num_layers(); ++layer) {
    Tensor& w = net.layers()[layer].weights;
    for (size_t i = 0; i < std::min<size_t>(w.size(), 6); ++i) {
      const double orig = w.data()[i];
      auto f = [&](double v) {
        w.data()[i] = v;
        const double loss = probe_loss(net.forward(x));
        w.data()[i] = orig;
        return loss;
      };
      const double fd = testutil::central_diff(f, orig, 1e-5);
      CHECK(testutil::rel_err(grads[layer].grad_weights.data()[i], fd, 1e-6) < 1e-4);
    }
  }
  (void)params;
}

TEST_CASE("checkpoint container round trip") {
  Rng rng(11);
  Checkpoint ck;
  ck.put("alpha", testutil::random_tensor(3, 4, rng));
  ck.put("beta/0/w", testutil::random_tensor(1, 7, rng));
  const auto bytes = ck.serialize();
  CHECK(bytes[0] == 'P');
  CHECK(bytes[1] == '2');
  CHECK(bytes[2] == 'N');
  CHECK(bytes[3] == '2');
  const Checkpoint back = Checkpoint::deserialize(bytes);
  CHECK(back.get("alpha") == ck.get("alpha"));
  CHECK(back.get("beta/0/w") == ck.get("beta/0/w"));
  CHECK_THROWS_AS(back.get("gamma"), IoError);

  const std::string path = "/tmp/p2n2_test_ck.p2n2";
  ck.save(path);
  const Checkpoint loaded = Checkpoint::load(path);
  CHECK(loaded.get("alpha") == ck.get("alpha"));
  std::remove(path.c_str());

  SUBCASE("truncated input is rejected") {
    auto bad = bytes;
    bad.resize(bytes.size() - 3);
    CHECK_THROWS_AS(Checkpoint::deserialize(bad), IoError);
  }
}

TEST_SUITE_END();
