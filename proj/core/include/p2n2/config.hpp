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

#include <chrono>
#include <string>
#include <vector>

#include "p2n2/fixed.hpp"
#include "p2n2/message.hpp"
#include "p2n2/nn.hpp"

namespace p2n2 {

// Everything the three roles must agree on for one training session. The
// handshake exchanges a digest of the canonical text; any divergence aborts
// the run before data moves.
struct SessionConfig {
  // Topology of the network: hidden layer dims h1..hL and their activations;
  // the label holder's output layer (h_L -> 1, sigmoid) is implied.
  std::vector<size_t> hidden_dims = {8, 8};
  std::vector<Activation> hidden_acts = {Activation::Sigmoid, Activation::Sigmoid};
  // Number of leading hidden layers the data holders compute jointly over
  // shares. Layers before the cut must be linear (their activations cannot
  // be evaluated on shares); the cut layer's activation runs on the server
  // after reconstruction.
  size_t cut_layers = 1;

  // Feature split dims; fixed before the session starts.
  size_t dim_a = 0;
  size_t dim_b = 0;
  size_t n_train = 0;
  size_t n_test = 0;

  // Optimization.
  double learning_rate = 0.001;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  double clip_norm = 0.0;  // 0 disables
  size_t batch_size = 256;
  size_t epochs = 1;

  // Defender co-training. lambda = 0 disables the whole mechanism.
  double lambda = 0.0;
  bool defender_enabled_override = false;  // force nets to exist even at lambda 0
  std::vector<size_t> defender_widths = {512, 128};
  double defender_lr = 0.01;
  OptimizerKind defender_optimizer = OptimizerKind::Adam;
  // Update defenders in the direction written in the defender objectives
  // (ascent on the distance) instead of the simulated-attacker descent.
  bool defender_literal_max = false;

  // Fixed-point ring.
  FxConfig fx;

  // Test mode: holders hand the server plaintext blocks for the first layer
  // so fixed-point noise is excluded; only valid with cut_layers == 1.
  bool plaintext_first_layer = false;

  uint64_t seed = 0;
  size_t eval_every = 10;    // test-loss cadence in steps
  size_t eval_sample = 1024; // rows of the test split used for the cadence

  std::chrono::milliseconds handshake_timeout{30000};
  std::chrono::milliseconds step_timeout{120000};

  // Outbound throttle applied to every channel (benchmarking); 0 = off.
  uint64_t throttle_bps = 0;

  bool defender_enabled() const {
    return lambda != 0.0 || defender_enabled_override;
  }
  size_t num_hidden() const { return hidden_dims.size(); }
  size_t cut_dim() const { return hidden_dims.at(cut_layers - 1); }

  void validate() const;

  // Canonical key=value rendering; the handshake digest hashes this.
  std::string canonical_text() const;
  SessionId digest() const;
};

// key=value config file (same format the schema files use). Unknown keys
// are rejected. Lists are comma separated; activations by name.
SessionConfig parse_config_text(const std::string& text);
SessionConfig load_config(const std::string& path);
std::string render_config(const SessionConfig& cfg);

}  // namespace p2n2
