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

#include "p2n2/split.hpp"

// Internal plain-path helpers shared by the split server (plaintext-first-
// layer mode), the training objective, and the monolithic baseline. Both
// sides of every equivalence test must run through these same routines so
// their floating-point operation sequences agree exactly.

namespace p2n2::detail {

struct CutCaches {
  Tensor x_full;                    // [x_a | x_b]
  std::vector<Tensor> layer_inputs; // input to layer l's matmul, l = 1..cut
  Tensor h_cut;                     // post-activation at the cut
};

// h_cut = f_cut( cut-chain(x) + cut_bias ). Layers before the cut are linear
// by configuration.
Tensor cut_forward(const ModelPartition& p, const SessionConfig& cfg, const Tensor& x_a,
                   const Tensor& x_b, CutCaches* caches);

struct CutGrads {
  Tensor theta_a, theta_b;
  std::vector<Tensor> shared_weights;
  std::vector<Tensor> shared_biases;
  Tensor cut_bias;
};

// Backward from d(objective)/d(h_cut) down to the holder blocks. Returns the
// stacked first-layer gradient via the per-block fields.
CutGrads cut_backward(const ModelPartition& p, const SessionConfig& cfg,
                      const CutCaches& caches, const Tensor& grad_h_cut);

struct FullCaches {
  CutCaches cut;
  std::vector<DenseCache> server;
  DenseCache out;
  Tensor y_hat;
};

Tensor full_forward(const ModelPartition& p, const SessionConfig& cfg, const Tensor& x_a,
                    const Tensor& x_b, FullCaches* caches);

// Shared batch schedule; every role derives the identical sequence from the
// config alone.
enum class StepKind : uint8_t { Train, Eval, ScoreTest, ScoreTrain };

struct Step {
  StepKind kind;
  std::vector<size_t> rows;  // into train (Train/ScoreTrain) or test sets
};

std::vector<Step> build_schedule(const SessionConfig& cfg, bool predict_only);

Tensor labels_to_tensor(const std::vector<double>& y, const std::vector<size_t>& rows);

}  // namespace p2n2::detail
