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

#include <memory>
#include <optional>

#include "p2n2/checkpoint.hpp"
#include "p2n2/config.hpp"
#include "p2n2/nn.hpp"
#include "p2n2/session.hpp"
#include "p2n2/share.hpp"
#include "p2n2/trace.hpp"

namespace p2n2 {

// Model parameters partitioned by owner. theta_a/theta_b are the holders'
// blocks of the stacked first-layer weight; layers 2..cut (when the cut is
// deeper than one) stay with holder A and are multiplied under shares; the
// cut layer's bias lives on the server and is added after reconstruction,
// which keeps the joint protocol exactly a bias-free matrix product.
struct ModelPartition {
  Tensor theta_a;                       // dim_a x h1, holder A
  Tensor theta_b;                       // dim_b x h1, holder B
  std::vector<Tensor> shared_weights;   // h_{l-1} x h_l for l in 2..cut, at A
  std::vector<Tensor> shared_biases;    // 1 x h_l for l in 1..cut-1, at A
  Tensor cut_bias;                      // 1 x h_cut, server
  Mlp server;                           // layers cut+1..L, server
  DenseParams output;                   // h_L x 1 plus bias, holder A
  Mlp defender_a;                       // h_cut -> dim_a, holder A
  Mlp defender_b;                       // h_cut -> dim_b, holder B
};

// Deterministic init from the session seed; every component draws from its
// own derived stream, so configurations that differ only in optional parts
// (say, the defender) initialize the common parts identically.
ModelPartition init_partition(const SessionConfig& cfg);

Checkpoint partition_to_checkpoint(const ModelPartition& p);
ModelPartition partition_from_checkpoint(const Checkpoint& ck, const SessionConfig& cfg);

// Gradients of the training objective logistic(y, y_hat) - lambda*(d_a+d_b)
// for every parameter group. Defender entries hold the objective's own
// derivative (-lambda * d distance / d theta_d), not the defenders' update
// direction.
struct ObjectiveGrads {
  Tensor theta_a, theta_b;
  std::vector<Tensor> shared_weights;
  std::vector<Tensor> shared_biases;
  Tensor cut_bias;
  std::vector<DenseGrads> server;
  DenseGrads output;
  std::vector<DenseGrads> defender_a;
  std::vector<DenseGrads> defender_b;
};

// Pure single-process evaluation of the objective and its gradients over one
// batch; the finite-difference anchor for the distributed backward path and
// the computational core of the monolithic baseline.
double split_objective(const ModelPartition& p, const SessionConfig& cfg,
                       const Tensor& x_a, const Tensor& x_b, const Tensor& y);
ObjectiveGrads split_objective_grads(const ModelPartition& p, const SessionConfig& cfg,
                                     const Tensor& x_a, const Tensor& x_b,
                                     const Tensor& y, double* loss_out = nullptr,
                                     double* d_a_out = nullptr, double* d_b_out = nullptr);

// The vertically split corpus a session trains on.
struct SplitData {
  Tensor x_a_train, x_b_train;
  Tensor x_a_test, x_b_test;
  std::vector<double> y_train, y_test;
  uint64_t fingerprint = 0;

  void fill_config_dims(SessionConfig& cfg) const;
};

struct TrainOutcome {
  ModelPartition partition;
  TrainingTrace trace;
  double final_train_loss = 0.0;
  double train_auc = 0.0;
  double test_auc = 0.0;
  std::vector<double> test_scores;
};

// Per-role inputs for the networked runners. Holders pass their feature
// slices; A passes labels. warm_start skips init (prediction sessions).
struct RoleInput {
  const Tensor* x_train = nullptr;
  const Tensor* x_test = nullptr;
  const std::vector<double>* y_train = nullptr;
  const std::vector<double>* y_test = nullptr;
  const ModelPartition* warm_start = nullptr;
  bool predict_only = false;
  bool capture_first_step_grads = false;
  bool record_wall_clock = true;
  uint64_t dataset_fingerprint = 0;
};

struct RoleOutcome {
  ModelPartition parts;        // only this role's members are meaningful
  TrainingTrace trace;         // holder A
  double final_train_loss = 0.0;
  double train_auc = 0.0;      // holder A
  double test_auc = 0.0;       // holder A
  std::vector<double> test_scores;  // holder A
  ObjectiveGrads captured;     // when capture_first_step_grads
};

// Runs one role to completion over established channels (handshake
// included). Throws on abort; best-effort Abort frames go to both peers
// first.
RoleOutcome run_role(RoleId role, const SessionConfig& cfg, const RoleInput& input,
                     RoleChannels channels);

// In-process session: three role threads over loopback channels.
struct LocalSimOptions {
  std::shared_ptr<TranscriptSink> transcript;  // records every frame when set
  std::optional<RoleId> fault_role;            // simulated crash
  uint64_t fault_after_frames = 0;
  bool record_wall_clock = false;
  bool capture_first_step_grads = false;
};

struct LocalSimResult {
  TrainOutcome outcome;
  ObjectiveGrads captured;
};

LocalSimResult train_split_local(const SessionConfig& cfg, const SplitData& data,
                                 const LocalSimOptions& opts = {});

// Forward-only local session with a trained partition; returns scores.
std::vector<double> predict_split_local(const SessionConfig& cfg,
                                        const ModelPartition& partition,
                                        const Tensor& x_a, const Tensor& x_b);

// Monolithic plaintext baseline: same partition structure, same seeds, same
// schedule, no protocol. With lambda = 0 its per-step losses equal the
// plaintext-first-layer split run bit for bit.
TrainOutcome train_monolithic(const SessionConfig& cfg, const SplitData& data);

// Plain forward through the partition (no protocol); y_hat for given inputs.
Tensor partition_forward(const ModelPartition& p, const SessionConfig& cfg,
                         const Tensor& x_a, const Tensor& x_b,
                         Tensor* h_cut_out = nullptr);

}  // namespace p2n2
