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

#include <cmath>

#include "p2n2/data.hpp"
#include "split_internal.hpp"

namespace p2n2 {

// Single-process baseline trainer. Runs the identical schedule and the
// identical floating-point operation sequence as the split trainer in
// plaintext-first-layer mode, just without any transport, so the two can be
// compared step for step.
TrainOutcome train_monolithic(const SessionConfig& cfg, const SplitData& data) {
  cfg.validate();
  P2N2_REQUIRE(cfg.lambda == 0.0, ConfigError,
               "the monolithic baseline trains the plain network (lambda must be 0)");

  TrainOutcome out;
  out.partition = init_partition(cfg);
  ModelPartition& p = out.partition;

  OptimizerState opt_a, opt_b, opt_s;
  for (OptimizerState* s : {&opt_a, &opt_b, &opt_s}) {
    s->config.kind = cfg.optimizer;
    s->config.learning_rate = cfg.learning_rate;
    s->config.clip_norm = cfg.clip_norm;
  }

  const auto schedule = detail::build_schedule(cfg, false);
  out.trace.config_digest = cfg.digest();
  out.trace.dataset_fingerprint = data.fingerprint;

  std::vector<double> test_scores, train_scores;
  uint64_t train_step = 0;

  for (const auto& step : schedule) {
    using detail::StepKind;
    const bool from_train =
        step.kind == StepKind::Train || step.kind == StepKind::ScoreTrain;
    const Tensor x_a = from_train ? data.x_a_train.rows_subset(step.rows)
                                  : data.x_a_test.rows_subset(step.rows);
    const Tensor x_b = from_train ? data.x_b_train.rows_subset(step.rows)
                                  : data.x_b_test.rows_subset(step.rows);

    if (step.kind != StepKind::Train) {
      const Tensor y_hat = detail::full_forward(p, cfg, x_a, x_b, nullptr);
      if (step.kind == StepKind::Eval) {
        const Tensor y = detail::labels_to_tensor(data.y_test, step.rows);
        if (!out.trace.steps.empty()) {
          out.trace.steps.back().test_loss = logistic_loss(y_hat, y).loss;
        }
      } else {
        auto& dst = step.kind == StepKind::ScoreTest ? test_scores : train_scores;
        for (size_t r = 0; r < y_hat.rows(); ++r) dst.push_back(y_hat.at(r, 0));
      }
      continue;
    }

    ++train_step;
    const Tensor y = detail::labels_to_tensor(data.y_train, step.rows);
    double loss = 0.0;
    ObjectiveGrads g = split_objective_grads(p, cfg, x_a, x_b, y, &loss);

    // Same three optimizer groups as the distributed roles, same order.
    {
      std::vector<Tensor*> params{&p.theta_a};
      std::vector<const Tensor*> grads{&g.theta_a};
      for (size_t i = 0; i < p.shared_weights.size(); ++i) {
        params.push_back(&p.shared_weights[i]);
        grads.push_back(&g.shared_weights[i]);
        params.push_back(&p.shared_biases[i]);
        grads.push_back(&g.shared_biases[i]);
      }
      params.push_back(&p.output.weights);
      grads.push_back(&g.output.grad_weights);
      params.push_back(&p.output.bias);
      grads.push_back(&g.output.grad_bias);
      optimizer_step(params, grads, opt_a);
    }
    {
      std::vector<Tensor*> params{&p.theta_b};
      std::vector<const Tensor*> grads{&g.theta_b};
      optimizer_step(params, grads, opt_b);
    }
    {
      std::vector<Tensor*> params{&p.cut_bias};
      std::vector<const Tensor*> grads{&g.cut_bias};
      for (size_t i = 0; i < p.server.num_layers(); ++i) {
        params.push_back(&p.server.layers()[i].weights);
        grads.push_back(&g.server[i].grad_weights);
        params.push_back(&p.server.layers()[i].bias);
        grads.push_back(&g.server[i].grad_bias);
      }
      optimizer_step(params, grads, opt_s);
    }

    TraceStep row;
    row.iteration = train_step;
    row.train_loss = loss;
    row.test_loss = NAN;
    out.trace.steps.push_back(row);
    out.final_train_loss = loss;
  }

  out.test_auc = auc(test_scores, data.y_test);
  out.train_auc = auc(train_scores, data.y_train);
  out.test_scores = std::move(test_scores);
  return out;
}

}  // namespace p2n2
