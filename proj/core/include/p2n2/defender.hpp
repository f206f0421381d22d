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

#pragma once

#include <string>
#include <vector>

#include "p2n2/checkpoint.hpp"
#include "p2n2/nn.hpp"

namespace p2n2 {

// A holder's defender: a dense chain mapping the exposed cut activation back
// to that holder's feature block. Trained as a simulated reconstruction
// attacker (descending the distance) so the main objective, which subtracts
// the distance, hardens the cut layer against exactly this adversary. The
// written objectives put a max over the defender's own parameters; flipping
// literal_max reproduces that reading for comparison.
Mlp make_defender(size_t code_dim, const std::vector<size_t>& widths,
                  size_t feature_dim, Rng& rng);

struct DefenderBackward {
  double distance = 0.0;               // mse(x_own, net(h))
  Tensor grad_h;                       // d distance / d h
  std::vector<DenseGrads> param_grads; // d distance / d theta_d
};

// Pure: forward + backward of the reconstruction distance at current params.
DefenderBackward defender_backward(const Mlp& net, const Tensor& h, const Tensor& x_own);

// One defender optimizer step. literal_max ascends the distance instead of
// descending it.
void defender_apply(Mlp& net, const std::vector<DenseGrads>& grads,
                    OptimizerState& state, bool literal_max);

struct DefenderStepResult {
  double distance = 0.0;
  Tensor grad_h_term;  // -lambda * d distance / d h, at pre-update params
};

// distance + the main model's cut-layer gradient term, then the net update.
DefenderStepResult defender_step(const Tensor& h, const Tensor& x_own, Mlp& net,
                                 OptimizerState& state, double lambda,
                                 bool literal_max = false);

// Server-side reconstruction attacker trained on leaked (h, x) pairs.
struct AttackerConfig {
  std::vector<size_t> widths = {512, 128};
  size_t epochs = 60;
  size_t batch_size = 32;
  double learning_rate = 0.01;  // Adam
  uint64_t seed = 0;
};

// Requires at least 100 leaked pairs; evaluation must use disjoint records.
Mlp train_attacker(const Tensor& leaked_h, const Tensor& leaked_x,
                   const AttackerConfig& cfg);

struct RecoveryReport {
  std::vector<double> per_record_mse;
  double mean_mse = 0.0;
  Tensor reconstructions;  // one row per eval record
};

RecoveryReport recovery_report(const Mlp& attacker, const Tensor& eval_h,
                               const Tensor& eval_x);

// Dump format shared with model checkpoints: tensors "orig/<i>", "recon/<i>".
Checkpoint recovery_dump(const RecoveryReport& report, const Tensor& eval_x);

}  // namespace p2n2
