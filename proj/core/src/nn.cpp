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

#include "p2n2/nn.hpp"

#include <atomic>
#include <cmath>

namespace p2n2 {

namespace {

std::atomic<uint64_t> g_logistic_clamps{0};

constexpr double kProbEps = 1e-12;

double clamp_prob(double p, bool* clamped) {
  if (p < kProbEps) {
    *clamped = true;
    return kProbEps;
  }
  if (p > 1.0 - kProbEps) {
    *clamped = true;
    return 1.0 - kProbEps;
  }
  return p;
}

}  // namespace

Activation activation_from_string(const std::string& s) {
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "relu") return Activation::Relu;
  if (s == "linear") return Activation::Linear;
  raise<ConfigError>("unknown activation '", s, "' (expected sigmoid|relu|linear)");
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Relu: return "relu";
    case Activation::Linear: return "linear";
  }
  return "?";
}

double sigmoid(double x) {
  double v;
  if (x >= 0.0) {
    v = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    v = e / (1.0 + e);
  }
  // Keep the open interval even under extreme saturation.
  if (v <= 0.0) v = kProbEps;
  if (v >= 1.0) v = 1.0 - kProbEps;
  return v;
}

Tensor apply_activation(const Tensor& z, Activation act) {
  Tensor out(z.rows(), z.cols());
  switch (act) {
    case Activation::Sigmoid:
      for (size_t i = 0; i < z.size(); ++i) out.data()[i] = sigmoid(z.data()[i]);
      break;
    case Activation::Relu:
      for (size_t i = 0; i < z.size(); ++i)
        out.data()[i] = z.data()[i] > 0.0 ? z.data()[i] : 0.0;
      break;
    case Activation::Linear:
      out = z;
      break;
  }
  return out;
}

Tensor activation_deriv_from_output(const Tensor& out, Activation act) {
  Tensor d(out.rows(), out.cols());
  switch (act) {
    case Activation::Sigmoid:
      for (size_t i = 0; i < out.size(); ++i)
        d.data()[i] = out.data()[i] * (1.0 - out.data()[i]);
      break;
    case Activation::Relu:
      for (size_t i = 0; i < out.size(); ++i) d.data()[i] = out.data()[i] > 0.0 ? 1.0 : 0.0;
      break;
    case Activation::Linear:
      for (size_t i = 0; i < out.size(); ++i) d.data()[i] = 1.0;
      break;
  }
  return d;
}

DenseParams init_dense(size_t in_dim, size_t out_dim, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  DenseParams p{Tensor(in_dim, out_dim), Tensor(1, out_dim)};
  for (auto& w : p.weights.raw()) w = rng.uniform(-bound, bound);
  return p;
}

Tensor dense_forward(const Tensor& x, const DenseParams& p, Activation act,
                     DenseCache* cache) {
  P2N2_REQUIRE(x.cols() == p.in_dim(), ShapeError, "dense_forward: input cols ",
               x.cols(), " != in_dim ", p.in_dim());
  Tensor z = add_row_broadcast(matmul(x, p.weights), p.bias);
  Tensor out = apply_activation(z, act);
  out.require_finite("dense_forward output");
  if (cache != nullptr) {
    cache->input = x;
    cache->output = out;
  }
  return out;
}

DenseGrads dense_backward(const Tensor& grad_out, const DenseCache& cache,
                          const DenseParams& p, Activation act) {
  P2N2_REQUIRE(grad_out.same_shape(cache.output), ShapeError,
               "dense_backward: grad shape mismatch");
  const Tensor dz = hadamard(grad_out, activation_deriv_from_output(cache.output, act));
  DenseGrads g;
  g.grad_weights = matmul_tn(cache.input, dz);
  g.grad_bias = col_sum(dz);
  g.grad_input = matmul_nt(dz, p.weights);
  return g;
}

LossResult logistic_loss(const Tensor& y_hat, const Tensor& y) {
  P2N2_REQUIRE(y_hat.same_shape(y), ShapeError, "logistic_loss shape mismatch");
  const double n = static_cast<double>(y_hat.size());
  LossResult r;
  r.grad = Tensor(y_hat.rows(), y_hat.cols());
  double total = 0.0;
  bool clamped = false;
  for (size_t i = 0; i < y_hat.size(); ++i) {
    const double p = clamp_prob(y_hat.data()[i], &clamped);
    const double t = y.data()[i];
    total += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
    r.grad.data()[i] = (-t / p + (1.0 - t) / (1.0 - p)) / n;
  }
  if (clamped) g_logistic_clamps.fetch_add(1, std::memory_order_relaxed);
  r.loss = total / n;
  return r;
}

uint64_t logistic_clamp_count() { return g_logistic_clamps.load(std::memory_order_relaxed); }
void reset_logistic_clamp_count() { g_logistic_clamps.store(0, std::memory_order_relaxed); }

DistanceResult mse_distance(const Tensor& x, const Tensor& x_hat) {
  P2N2_REQUIRE(x.same_shape(x_hat), ShapeError, "mse_distance shape mismatch");
  const double n = static_cast<double>(x.size());
  DistanceResult r;
  r.grad = Tensor(x.rows(), x.cols());
  double total = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x_hat.data()[i] - x.data()[i];
    total += d * d;
    r.grad.data()[i] = 2.0 * d / n;
  }
  r.distance = total / n;
  return r;
}

void optimizer_step(std::vector<Tensor*> params, std::vector<const Tensor*> grads,
                    OptimizerState& state) {
  P2N2_REQUIRE(params.size() == grads.size(), ShapeError,
               "optimizer_step: ", params.size(), " params vs ", grads.size(), " grads");
  const OptimizerConfig& cfg = state.config;

  double clip_factor = 1.0;
  if (cfg.clip_norm > 0.0) {
    double sq = 0.0;
    for (const Tensor* g : grads) {
      for (size_t i = 0; i < g->size(); ++i) sq += g->data()[i] * g->data()[i];
    }
    const double norm = std::sqrt(sq);
    if (norm > cfg.clip_norm) clip_factor = cfg.clip_norm / norm;
  }

  if (cfg.kind == OptimizerKind::Sgd) {
    for (size_t i = 0; i < params.size(); ++i) {
      P2N2_REQUIRE(params[i]->same_shape(*grads[i]), ShapeError,
                   "optimizer_step: param/grad shape mismatch at group ", i);
      for (size_t j = 0; j < params[i]->size(); ++j) {
        params[i]->data()[j] -= cfg.learning_rate * clip_factor * grads[i]->data()[j];
      }
    }
    ++state.step;
    return;
  }

  // Adam
  if (state.m.empty()) {
    for (const Tensor* p : params) {
      state.m.emplace_back(p->rows(), p->cols());
      state.v.emplace_back(p->rows(), p->cols());
    }
  }
  P2N2_REQUIRE(state.m.size() == params.size(), ShapeError,
               "optimizer state holds ", state.m.size(), " moments for ",
               params.size(), " params");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (size_t i = 0; i < params.size(); ++i) {
    P2N2_REQUIRE(params[i]->same_shape(*grads[i]), ShapeError,
                 "optimizer_step: param/grad shape mismatch at group ", i);
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (size_t j = 0; j < params[i]->size(); ++j) {
      const double g = clip_factor * grads[i]->data()[j];
      m.data()[j] = cfg.beta1 * m.data()[j] + (1.0 - cfg.beta1) * g;
      v.data()[j] = cfg.beta2 * v.data()[j] + (1.0 - cfg.beta2) * g * g;
      const double mhat = m.data()[j] / bc1;
      const double vhat = v.data()[j] / bc2;
      params[i]->data()[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  }
}

Mlp::Mlp(const std::vector<LayerSpec>& specs, Rng& rng) : specs_(specs) {
  for (size_t i = 0; i < specs.size(); ++i) {
    P2N2_REQUIRE(specs[i].in_dim > 0 && specs[i].out_dim > 0, ConfigError,
                 "layer ", i, " has non-positive dims");
    if (i > 0) {
      P2N2_REQUIRE(specs[i].in_dim == specs[i - 1].out_dim, ConfigError,
                   "layer ", i, " in_dim ", specs[i].in_dim, " != previous out_dim ",
                   specs[i - 1].out_dim);
    }
    layers_.push_back(init_dense(specs[i].in_dim, specs[i].out_dim, rng));
  }
}

Tensor Mlp::forward(const Tensor& x, std::vector<DenseCache>* caches) const {
  Tensor h = x;
  if (caches != nullptr) caches->resize(layers_.size());
  for (size_t i = 0; i < layers_.size(); ++i) {
    h = dense_forward(h, layers_[i], specs_[i].activation,
                      caches != nullptr ? &(*caches)[i] : nullptr);
  }
  return h;
}

Tensor Mlp::backward(const Tensor& grad_out, const std::vector<DenseCache>& caches,
                     std::vector<DenseGrads>* grads) const {
  P2N2_REQUIRE(caches.size() == layers_.size(), ProtocolError,
               "backward without matching forward caches");
  if (grads != nullptr) grads->resize(layers_.size());
  Tensor g = grad_out;
  for (size_t i = layers_.size(); i-- > 0;) {
    DenseGrads dg = dense_backward(g, caches[i], layers_[i], specs_[i].activation);
    g = dg.grad_input;
    if (grads != nullptr) (*grads)[i] = std::move(dg);
  }
  return g;
}

void Mlp::apply(const std::vector<DenseGrads>& grads, OptimizerState& state) {
  std::vector<Tensor*> params;
  std::vector<const Tensor*> gs;
  for (size_t i = 0; i < layers_.size(); ++i) {
    params.push_back(&layers_[i].weights);
    params.push_back(&layers_[i].bias);
    gs.push_back(&grads[i].grad_weights);
    gs.push_back(&grads[i].grad_bias);
  }
  optimizer_step(params, gs, state);
}

std::vector<Tensor*> Mlp::param_tensors() {
  std::vector<Tensor*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weights);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Tensor*> Mlp::param_tensors() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_) {
    out.push_back(&l.weights);
    out.push_back(&l.bias);
  }
  return out;
}

}  // namespace p2n2
