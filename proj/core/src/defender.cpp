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

#include "p2n2/defender.hpp"

#include <numeric>

#include "p2n2/errors.hpp"

namespace p2n2 {

Mlp make_defender(size_t code_dim, const std::vector<size_t>& widths,
                  size_t feature_dim, Rng& rng) {
  std::vector<LayerSpec> specs;
  size_t in = code_dim;
  for (size_t w : widths) {
    specs.push_back({in, w, Activation::Relu});
    in = w;
  }
  specs.push_back({in, feature_dim, Activation::Linear});
  return Mlp(specs, rng);
}

DefenderBackward defender_backward(const Mlp& net, const Tensor& h, const Tensor& x_own) {
  std::vector<DenseCache> caches;
  const Tensor recon = net.forward(h, &caches);
  const DistanceResult mse = mse_distance(x_own, recon);
  DefenderBackward out;
  out.distance = mse.distance;
  out.grad_h = net.backward(mse.grad, caches, &out.param_grads);
  return out;
}

void defender_apply(Mlp& net, const std::vector<DenseGrads>& grads,
                    OptimizerState& state, bool literal_max) {
  if (!literal_max) {
    net.apply(grads, state);
    return;
  }
  std::vector<DenseGrads> flipped = grads;
  for (auto& g : flipped) {
    g.grad_weights = scale(g.grad_weights, -1.0);
    g.grad_bias = scale(g.grad_bias, -1.0);
  }
  net.apply(flipped, state);
}

DefenderStepResult defender_step(const Tensor& h, const Tensor& x_own, Mlp& net,
                                 OptimizerState& state, double lambda,
                                 bool literal_max) {
  DefenderBackward bw = defender_backward(net, h, x_own);
  DefenderStepResult out;
  out.distance = bw.distance;
  out.grad_h_term = scale(bw.grad_h, -lambda);
  defender_apply(net, bw.param_grads, state, literal_max);
  return out;
}

Mlp train_attacker(const Tensor& leaked_h, const Tensor& leaked_x,
                   const AttackerConfig& cfg) {
  P2N2_REQUIRE(leaked_h.rows() == leaked_x.rows(), ShapeError,
               "leaked pair count mismatch: ", leaked_h.rows(), " vs ",
               leaked_x.rows());
  P2N2_REQUIRE(leaked_h.rows() >= 100, ConfigError,
               "attacker training needs at least 100 leaked pairs, got ",
               leaked_h.rows());

  Rng init_rng(derive_seed(cfg.seed, "attacker-init"));
  Mlp net = make_defender(leaked_h.cols(), cfg.widths, leaked_x.cols(), init_rng);

  OptimizerState opt;
  opt.config.kind = OptimizerKind::Adam;
  opt.config.learning_rate = cfg.learning_rate;

  const size_t n = leaked_h.rows();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, "attacker-shuffle", epoch));
    shuffle_rng.shuffle(order);
    for (size_t start = 0; start < n; start += cfg.batch_size) {
      const size_t end = std::min(n, start + cfg.batch_size);
      std::vector<size_t> rows(order.begin() + static_cast<long>(start),
                               order.begin() + static_cast<long>(end));
      const Tensor hb = leaked_h.rows_subset(rows);
      const Tensor xb = leaked_x.rows_subset(rows);
      DefenderBackward bw = defender_backward(net, hb, xb);
      net.apply(bw.param_grads, opt);
    }
  }
  return net;
}

RecoveryReport recovery_report(const Mlp& attacker, const Tensor& eval_h,
                               const Tensor& eval_x) {
  P2N2_REQUIRE(eval_h.rows() == eval_x.rows(), ShapeError,
               "recovery eval pair count mismatch");
  RecoveryReport rep;
  rep.reconstructions = attacker.forward(eval_h);
  rep.per_record_mse.resize(eval_h.rows());
  double total = 0.0;
  for (size_t r = 0; r < eval_h.rows(); ++r) {
    double s = 0.0;
    for (size_t c = 0; c < eval_x.cols(); ++c) {
      const double d = rep.reconstructions.at(r, c) - eval_x.at(r, c);
      s += d * d;
    }
    rep.per_record_mse[r] = s / static_cast<double>(eval_x.cols());
    total += rep.per_record_mse[r];
  }
  rep.mean_mse = total / static_cast<double>(eval_h.rows());
  return rep;
}

Checkpoint recovery_dump(const RecoveryReport& report, const Tensor& eval_x) {
  Checkpoint ck;
  for (size_t r = 0; r < eval_x.rows(); ++r) {
    ck.put("orig/" + std::to_string(r), eval_x.row(r));
    ck.put("recon/" + std::to_string(r), report.reconstructions.row(r));
  }
  return ck;
}

}  // namespace p2n2
