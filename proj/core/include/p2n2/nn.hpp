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

#include <cstdint>
#include <string>
#include <vector>

#include "p2n2/rng.hpp"
#include "p2n2/tensor.hpp"

namespace p2n2 {

enum class Activation : uint8_t { Sigmoid = 0, Relu = 1, Linear = 2 };

Activation activation_from_string(const std::string& s);
const char* activation_name(Activation a);

// Stable sigmoid; output clamped to the open interval (0,1).
double sigmoid(double x);
Tensor apply_activation(const Tensor& z, Activation act);
// Derivative computed from the activation *output* (valid for the closed set
// {sigmoid, relu, linear}).
Tensor activation_deriv_from_output(const Tensor& out, Activation act);

struct LayerSpec {
  size_t in_dim = 0;
  size_t out_dim = 0;
  Activation activation = Activation::Sigmoid;
};

struct DenseParams {
  Tensor weights;  // in_dim x out_dim
  Tensor bias;     // 1 x out_dim

  size_t in_dim() const { return weights.rows(); }
  size_t out_dim() const { return weights.cols(); }
};

// Glorot-uniform init in +-sqrt(6/(in+out)).
DenseParams init_dense(size_t in_dim, size_t out_dim, Rng& rng);

struct DenseCache {
  Tensor input;
  Tensor output;  // post-activation; derivative is recovered from it
};

struct DenseGrads {
  Tensor grad_input;
  Tensor grad_weights;
  Tensor grad_bias;
};

// out = act(x*W + b). The cache carries what backward needs.
Tensor dense_forward(const Tensor& x, const DenseParams& p, Activation act,
                     DenseCache* cache = nullptr);
DenseGrads dense_backward(const Tensor& grad_out, const DenseCache& cache,
                          const DenseParams& p, Activation act);

// Mean binary cross-entropy. Inputs outside (0,1) are clamped at 1e-12 and
// counted; see logistic_clamp_count().
struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d y_hat
};
LossResult logistic_loss(const Tensor& y_hat, const Tensor& y);
uint64_t logistic_clamp_count();
void reset_logistic_clamp_count();

// Mean squared error over all entries; gradient w.r.t. the reconstruction.
struct DistanceResult {
  double distance = 0.0;
  Tensor grad;  // d distance / d x_hat
};
DistanceResult mse_distance(const Tensor& x, const Tensor& x_hat);

enum class OptimizerKind : uint8_t { Sgd = 0, Adam = 1 };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Sgd;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global-norm clip over the gradient set passed to one step; <= 0 disables.
  double clip_norm = 0.0;
};

// Per-tensor Adam moments; SGD keeps nothing.
struct OptimizerState {
  OptimizerConfig config;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  uint64_t step = 0;
};

// One update over a parameter group. params[i] and grads[i] must correspond;
// moment shapes are created lazily on the first step.
void optimizer_step(std::vector<Tensor*> params, std::vector<const Tensor*> grads,
                    OptimizerState& state);

// A plain dense chain; used for the server stack, the defenders, and the
// reconstruction attacker.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<LayerSpec>& specs, Rng& rng);

  size_t num_layers() const { return layers_.size(); }
  const std::vector<LayerSpec>& specs() const { return specs_; }
  std::vector<DenseParams>& layers() { return layers_; }
  const std::vector<DenseParams>& layers() const { return layers_; }

  Tensor forward(const Tensor& x, std::vector<DenseCache>* caches = nullptr) const;
  // Returns gradient w.r.t. the input; fills per-layer parameter grads.
  Tensor backward(const Tensor& grad_out, const std::vector<DenseCache>& caches,
                  std::vector<DenseGrads>* grads) const;

  void apply(const std::vector<DenseGrads>& grads, OptimizerState& state);

  std::vector<Tensor*> param_tensors();
  std::vector<const Tensor*> param_tensors() const;

 private:
  std::vector<LayerSpec> specs_;
  std::vector<DenseParams> layers_;
};

}  // namespace p2n2
