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

#include "p2n2/split.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "p2n2/data.hpp"
#include "p2n2/defender.hpp"
#include "split_internal.hpp"

namespace p2n2 {

using detail::CutCaches;
using detail::CutGrads;
using detail::FullCaches;
using detail::Step;
using detail::StepKind;

// ---------------------------------------------------------------------------
// Partition init and checkpointing
// ---------------------------------------------------------------------------

namespace {

Tensor init_block(size_t rows, size_t cols, double bound, Rng& rng) {
  Tensor t(rows, cols);
  for (auto& w : t.raw()) w = rng.uniform(-bound, bound);
  return t;
}

std::vector<LayerSpec> server_specs(const SessionConfig& cfg) {
  std::vector<LayerSpec> specs;
  for (size_t l = cfg.cut_layers; l < cfg.num_hidden(); ++l) {
    specs.push_back({cfg.hidden_dims[l - 1], cfg.hidden_dims[l], cfg.hidden_acts[l]});
  }
  return specs;
}

size_t last_hidden_dim(const SessionConfig& cfg) { return cfg.hidden_dims.back(); }

}  // namespace

ModelPartition init_partition(const SessionConfig& cfg) {
  cfg.validate();
  P2N2_REQUIRE(cfg.dim_a > 0 && cfg.dim_b > 0, ConfigError,
               "partition init needs dim_a/dim_b set in the config");
  ModelPartition p;
  const size_t h1 = cfg.hidden_dims[0];
  // The stacked first layer has fan-in dim_a + dim_b; both blocks use the
  // stacked bound so the assembled matrix matches a monolithic init.
  const double bound1 =
      std::sqrt(6.0 / static_cast<double>(cfg.dim_a + cfg.dim_b + h1));
  {
    Rng rng(derive_seed(cfg.seed, "init/theta-a"));
    p.theta_a = init_block(cfg.dim_a, h1, bound1, rng);
  }
  {
    Rng rng(derive_seed(cfg.seed, "init/theta-b"));
    p.theta_b = init_block(cfg.dim_b, h1, bound1, rng);
  }
  for (size_t l = 2; l <= cfg.cut_layers; ++l) {
    Rng rng(derive_seed(cfg.seed, "init/shared-w", l));
    const size_t in = cfg.hidden_dims[l - 2], out = cfg.hidden_dims[l - 1];
    p.shared_weights.push_back(
        init_block(in, out, std::sqrt(6.0 / static_cast<double>(in + out)), rng));
    p.shared_biases.emplace_back(1, in);  // bias of layer l-1, zero-initialized
  }
  p.cut_bias = Tensor(1, cfg.cut_dim());
  {
    Rng rng(derive_seed(cfg.seed, "init/server"));
    p.server = Mlp(server_specs(cfg), rng);
  }
  {
    Rng rng(derive_seed(cfg.seed, "init/output"));
    p.output = init_dense(last_hidden_dim(cfg), 1, rng);
  }
  if (cfg.defender_enabled()) {
    {
      Rng rng(derive_seed(cfg.seed, "init/defender-a"));
      p.defender_a = make_defender(cfg.cut_dim(), cfg.defender_widths, cfg.dim_a, rng);
    }
    {
      Rng rng(derive_seed(cfg.seed, "init/defender-b"));
      p.defender_b = make_defender(cfg.cut_dim(), cfg.defender_widths, cfg.dim_b, rng);
    }
  }
  return p;
}

namespace {

void put_mlp(Checkpoint& ck, const std::string& prefix, const Mlp& mlp) {
  for (size_t i = 0; i < mlp.num_layers(); ++i) {
    ck.put(prefix + "/" + std::to_string(i) + "/w", mlp.layers()[i].weights);
    ck.put(prefix + "/" + std::to_string(i) + "/b", mlp.layers()[i].bias);
  }
}

void get_mlp(const Checkpoint& ck, const std::string& prefix, Mlp& mlp) {
  for (size_t i = 0; i < mlp.num_layers(); ++i) {
    mlp.layers()[i].weights = ck.get(prefix + "/" + std::to_string(i) + "/w");
    mlp.layers()[i].bias = ck.get(prefix + "/" + std::to_string(i) + "/b");
  }
}

}  // namespace

Checkpoint partition_to_checkpoint(const ModelPartition& p) {
  Checkpoint ck;
  ck.put("theta_a", p.theta_a);
  ck.put("theta_b", p.theta_b);
  for (size_t i = 0; i < p.shared_weights.size(); ++i) {
    ck.put("shared/" + std::to_string(i) + "/w", p.shared_weights[i]);
    ck.put("shared/" + std::to_string(i) + "/b", p.shared_biases[i]);
  }
  ck.put("cut_bias", p.cut_bias);
  put_mlp(ck, "server", p.server);
  ck.put("output/w", p.output.weights);
  ck.put("output/b", p.output.bias);
  put_mlp(ck, "defender_a", p.defender_a);
  put_mlp(ck, "defender_b", p.defender_b);
  return ck;
}

ModelPartition partition_from_checkpoint(const Checkpoint& ck, const SessionConfig& cfg) {
  ModelPartition p = init_partition(cfg);
  p.theta_a = ck.get("theta_a");
  p.theta_b = ck.get("theta_b");
  for (size_t i = 0; i < p.shared_weights.size(); ++i) {
    p.shared_weights[i] = ck.get("shared/" + std::to_string(i) + "/w");
    p.shared_biases[i] = ck.get("shared/" + std::to_string(i) + "/b");
  }
  p.cut_bias = ck.get("cut_bias");
  get_mlp(ck, "server", p.server);
  p.output.weights = ck.get("output/w");
  p.output.bias = ck.get("output/b");
  if (ck.contains("defender_a/0/w")) {
    get_mlp(ck, "defender_a", p.defender_a);
    get_mlp(ck, "defender_b", p.defender_b);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Plain path (shared with the monolithic baseline)
// ---------------------------------------------------------------------------

namespace detail {

Tensor cut_forward(const ModelPartition& p, const SessionConfig& cfg, const Tensor& x_a,
                   const Tensor& x_b, CutCaches* caches) {
  Tensor x_full = hcat(x_a, x_b);
  Tensor w1 = vcat(p.theta_a, p.theta_b);
  if (caches != nullptr) {
    caches->layer_inputs.clear();
    caches->layer_inputs.push_back(x_full);
  }
  Tensor z = matmul(x_full, w1);
  for (size_t l = 2; l <= cfg.cut_layers; ++l) {
    Tensor in = add_row_broadcast(z, p.shared_biases[l - 2]);
    if (caches != nullptr) caches->layer_inputs.push_back(in);
    z = matmul(in, p.shared_weights[l - 2]);
  }
  Tensor h_cut = apply_activation(add_row_broadcast(z, p.cut_bias),
                                  cfg.hidden_acts[cfg.cut_layers - 1]);
  h_cut.require_finite("cut layer activations");
  if (caches != nullptr) {
    caches->x_full = std::move(x_full);
    caches->h_cut = h_cut;
  }
  return h_cut;
}

CutGrads cut_backward(const ModelPartition& p, const SessionConfig& cfg,
                      const CutCaches& caches, const Tensor& grad_h_cut) {
  CutGrads g;
  Tensor delta = hadamard(grad_h_cut, activation_deriv_from_output(
                                          caches.h_cut, cfg.hidden_acts[cfg.cut_layers - 1]));
  g.cut_bias = col_sum(delta);
  g.shared_weights.resize(p.shared_weights.size());
  g.shared_biases.resize(p.shared_biases.size());
  for (size_t l = cfg.cut_layers; l >= 2; --l) {
    g.shared_weights[l - 2] = matmul_tn(caches.layer_inputs[l - 1], delta);
    Tensor g_in = matmul_nt(delta, p.shared_weights[l - 2]);
    g.shared_biases[l - 2] = col_sum(g_in);
    delta = std::move(g_in);
  }
  Tensor grad_w1 = matmul_tn(caches.x_full, delta);
  // Split the stacked gradient back into the holders' blocks.
  const size_t da = p.theta_a.rows();
  g.theta_a = Tensor(da, grad_w1.cols());
  g.theta_b = Tensor(p.theta_b.rows(), grad_w1.cols());
  for (size_t r = 0; r < da; ++r)
    for (size_t c = 0; c < grad_w1.cols(); ++c) g.theta_a.at(r, c) = grad_w1.at(r, c);
  for (size_t r = 0; r < g.theta_b.rows(); ++r)
    for (size_t c = 0; c < grad_w1.cols(); ++c)
      g.theta_b.at(r, c) = grad_w1.at(da + r, c);
  return g;
}

Tensor full_forward(const ModelPartition& p, const SessionConfig& cfg, const Tensor& x_a,
                    const Tensor& x_b, FullCaches* caches) {
  CutCaches* cc = caches != nullptr ? &caches->cut : nullptr;
  Tensor h = cut_forward(p, cfg, x_a, x_b, cc);
  h = p.server.forward(h, caches != nullptr ? &caches->server : nullptr);
  Tensor y_hat = dense_forward(h, p.output, Activation::Sigmoid,
                               caches != nullptr ? &caches->out : nullptr);
  if (caches != nullptr) caches->y_hat = y_hat;
  return y_hat;
}

std::vector<Step> build_schedule(const SessionConfig& cfg, bool predict_only) {
  std::vector<Step> steps;
  const auto chunked = [&](size_t n, StepKind kind, std::vector<Step>* out) {
    for (size_t start = 0; start < n; start += cfg.batch_size) {
      Step s;
      s.kind = kind;
      for (size_t i = start; i < std::min(n, start + cfg.batch_size); ++i)
        s.rows.push_back(i);
      out->push_back(std::move(s));
    }
  };

  if (predict_only) {
    chunked(cfg.n_test, StepKind::ScoreTest, &steps);
    return steps;
  }

  P2N2_REQUIRE(cfg.n_train >= 1 && cfg.n_test >= 1, ConfigError,
               "training sessions need n_train and n_test set");

  // Fixed evaluation subsample of the test split.
  std::vector<size_t> eval_rows(cfg.n_test);
  std::iota(eval_rows.begin(), eval_rows.end(), size_t{0});
  {
    Rng rng(derive_seed(cfg.seed, "eval-sample"));
    rng.shuffle(eval_rows);
  }
  eval_rows.resize(std::min(cfg.eval_sample, cfg.n_test));

  const size_t steps_per_epoch = (cfg.n_train + cfg.batch_size - 1) / cfg.batch_size;
  const size_t total_train_steps = steps_per_epoch * cfg.epochs;
  size_t t = 0;
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<size_t> order(cfg.n_train);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(derive_seed(cfg.seed, "shuffle", epoch));
    rng.shuffle(order);
    for (size_t start = 0; start < cfg.n_train; start += cfg.batch_size) {
      Step s;
      s.kind = StepKind::Train;
      for (size_t i = start; i < std::min(cfg.n_train, start + cfg.batch_size); ++i)
        s.rows.push_back(order[i]);
      steps.push_back(std::move(s));
      ++t;
      if (t == 1 || t % cfg.eval_every == 0 || t == total_train_steps) {
        steps.push_back(Step{StepKind::Eval, eval_rows});
      }
    }
  }
  chunked(cfg.n_test, StepKind::ScoreTest, &steps);
  chunked(cfg.n_train, StepKind::ScoreTrain, &steps);
  return steps;
}

Tensor labels_to_tensor(const std::vector<double>& y, const std::vector<size_t>& rows) {
  Tensor t(rows.size(), 1);
  for (size_t i = 0; i < rows.size(); ++i) t.at(i, 0) = y[rows[i]];
  return t;
}

}  // namespace detail

double split_objective(const ModelPartition& p, const SessionConfig& cfg,
                       const Tensor& x_a, const Tensor& x_b, const Tensor& y) {
  FullCaches caches;
  const Tensor y_hat = detail::full_forward(p, cfg, x_a, x_b, &caches);
  double obj = logistic_loss(y_hat, y).loss;
  if (cfg.defender_enabled()) {
    const Tensor recon_a = p.defender_a.forward(caches.cut.h_cut);
    const Tensor recon_b = p.defender_b.forward(caches.cut.h_cut);
    obj -= cfg.lambda * (mse_distance(x_a, recon_a).distance +
                         mse_distance(x_b, recon_b).distance);
  }
  return obj;
}

ObjectiveGrads split_objective_grads(const ModelPartition& p, const SessionConfig& cfg,
                                     const Tensor& x_a, const Tensor& x_b,
                                     const Tensor& y, double* loss_out, double* d_a_out,
                                     double* d_b_out) {
  FullCaches caches;
  const Tensor y_hat = detail::full_forward(p, cfg, x_a, x_b, &caches);
  const LossResult loss = logistic_loss(y_hat, y);
  if (loss_out != nullptr) *loss_out = loss.loss;

  ObjectiveGrads g;
  const DenseGrads out_g =
      dense_backward(loss.grad, caches.out, p.output, Activation::Sigmoid);
  g.output = out_g;
  Tensor g_hcut = p.server.backward(out_g.grad_input, caches.server, &g.server);

  double d_a = 0.0, d_b = 0.0;
  if (cfg.defender_enabled()) {
    DefenderBackward ba = defender_backward(p.defender_a, caches.cut.h_cut, x_a);
    DefenderBackward bb = defender_backward(p.defender_b, caches.cut.h_cut, x_b);
    d_a = ba.distance;
    d_b = bb.distance;
    g_hcut = add(g_hcut, add(scale(ba.grad_h, -cfg.lambda), scale(bb.grad_h, -cfg.lambda)));
    g.defender_a = std::move(ba.param_grads);
    g.defender_b = std::move(bb.param_grads);
    for (auto& dg : g.defender_a) {
      dg.grad_weights = scale(dg.grad_weights, -cfg.lambda);
      dg.grad_bias = scale(dg.grad_bias, -cfg.lambda);
    }
    for (auto& dg : g.defender_b) {
      dg.grad_weights = scale(dg.grad_weights, -cfg.lambda);
      dg.grad_bias = scale(dg.grad_bias, -cfg.lambda);
    }
  }
  if (d_a_out != nullptr) *d_a_out = d_a;
  if (d_b_out != nullptr) *d_b_out = d_b;

  CutGrads cg = detail::cut_backward(p, cfg, caches.cut, g_hcut);
  g.theta_a = std::move(cg.theta_a);
  g.theta_b = std::move(cg.theta_b);
  g.shared_weights = std::move(cg.shared_weights);
  g.shared_biases = std::move(cg.shared_biases);
  g.cut_bias = std::move(cg.cut_bias);
  return g;
}

void SplitData::fill_config_dims(SessionConfig& cfg) const {
  cfg.dim_a = x_a_train.cols();
  cfg.dim_b = x_b_train.cols();
  cfg.n_train = x_a_train.rows();
  cfg.n_test = x_a_test.empty() ? 0 : x_a_test.rows();
}

// ---------------------------------------------------------------------------
// Role runners
// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

// Encodes a public real gradient at an extra frac_bits of scale so the
// ring-side products keep useful precision on small gradient entries.
FxMatrix encode_scaled(const Tensor& t, const FxConfig& fx) {
  const double s = static_cast<double>(1ULL << fx.frac_bits);
  FxMatrix out(t.rows(), t.cols());
  for (size_t i = 0; i < t.size(); ++i) out.data()[i] = fx_encode(t.data()[i] * s, fx);
  return out;
}

Tensor decode_scaled(const FxMatrix& m, const FxConfig& fx) {
  const double s = static_cast<double>(1ULL << fx.frac_bits);
  Tensor out(m.rows(), m.cols());
  for (size_t i = 0; i < m.size(); ++i) out.data()[i] = fx_decode(m.data()[i], fx) / s;
  return out;
}

// Broadcast-add an encoded bias row into every row of a share (ring add on
// one party's share adds the plaintext once).
FxMatrix add_bias_to_share(const FxMatrix& share_payload, const Tensor& bias,
                           const FxConfig& fx) {
  FxMatrix out = share_payload;
  std::vector<RingElem> enc(bias.cols());
  for (size_t c = 0; c < bias.cols(); ++c) enc[c] = fx_encode(bias.at(0, c), fx);
  for (size_t r = 0; r < out.rows(); ++r) {
    for (size_t c = 0; c < out.cols(); ++c) out.at(r, c) += enc[c];
  }
  return out;
}

struct MpcForwardCaches {
  // This party's share of the input to layer l's product, l = 2..cut.
  std::vector<FxMatrix> layer_input_shares;
};

// Holder-side joint computation of the cut pre-activation over shares.
FxMatrix mpc_cut_forward(PartyId me, const SessionConfig& cfg, const Tensor& x_batch,
                         const Tensor& theta_own, const ModelPartition& parts,
                         TripleProvider& provider, Link& peer, Rng& share_rng,
                         MpcForwardCaches* caches) {
  const FxConfig& fx = cfg.fx;
  const FxMatrix x_enc = fx_encode_matrix(x_batch, fx);
  const FxMatrix t_enc = fx_encode_matrix(theta_own, fx);
  ShareMatrix s = secure_first_layer(me, x_enc, t_enc, provider, peer, fx, share_rng);
  for (size_t l = 2; l <= cfg.cut_layers; ++l) {
    FxMatrix in_share = s.payload;
    if (me == PartyId::A) {
      in_share = add_bias_to_share(in_share, parts.shared_biases[l - 2], fx);
    }
    if (caches != nullptr) caches->layer_input_shares.push_back(in_share);
    const size_t in_dim = cfg.hidden_dims[l - 2], out_dim = cfg.hidden_dims[l - 1];
    BeaverTriple triple = provider.issue(x_batch.rows(), in_dim, out_dim, me);
    FxMatrix raw =
        (me == PartyId::A)
            ? beaver_matmul_raw(me, in_share,
                                fx_encode_matrix(parts.shared_weights[l - 2], fx),
                                triple, peer)
            : beaver_matmul_raw(me, in_share, FxMatrix(in_dim, out_dim), triple, peer);
    s.payload = truncate_share(raw, me, fx.frac_bits);
  }
  return s.payload;
}

// Backward through the shared layers; returns the public first-layer delta.
// A owns the shared parameters and receives their reconstructed gradients;
// grads land in *cut_grads (A only).
Tensor mpc_shared_backward(PartyId me, const SessionConfig& cfg,
                           const ModelPartition& parts, const MpcForwardCaches& caches,
                           const Tensor& delta_cut, Link& peer, CutGrads* cut_grads) {
  const FxConfig& fx = cfg.fx;
  Tensor delta = delta_cut;
  if (cut_grads != nullptr) {
    cut_grads->shared_weights.resize(parts.shared_weights.size());
    cut_grads->shared_biases.resize(parts.shared_biases.size());
  }
  for (size_t l = cfg.cut_layers; l >= 2; --l) {
    const FxMatrix& in_share = caches.layer_input_shares[l - 2];
    const FxMatrix enc_delta = encode_scaled(delta, fx);
    FxMatrix g_share = truncate_share(
        fx_matmul_raw(fx_transpose(in_share), enc_delta), me, fx.frac_bits);
    if (me == PartyId::A) {
      FxMatrix g_peer = peer.recv_ring(MsgKind::ShareBlock);
      const Tensor grad_w = decode_scaled(fx_add(g_share, g_peer), fx);
      Tensor g_in = matmul_nt(delta, parts.shared_weights[l - 2]);
      if (cut_grads != nullptr) {
        cut_grads->shared_weights[l - 2] = grad_w;
        cut_grads->shared_biases[l - 2] = col_sum(g_in);
      }
      peer.send_real(MsgKind::Gradient, g_in);
      delta = std::move(g_in);
    } else {
      peer.send_ring(MsgKind::ShareBlock, g_share);
      delta = peer.recv_real(MsgKind::Gradient);
    }
  }
  return delta;
}

struct HolderState {
  OptimizerState opt;          // main parameters
  OptimizerState defender_opt;
};

double now_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void require_input(const void* p, const char* what, RoleId role) {
  P2N2_REQUIRE(p != nullptr, ConfigError, role_name(role), " needs ", what);
}

OptimizerState main_opt_state(const SessionConfig& cfg) {
  OptimizerState s;
  s.config.kind = cfg.optimizer;
  s.config.learning_rate = cfg.learning_rate;
  s.config.clip_norm = cfg.clip_norm;
  return s;
}

OptimizerState defender_opt_state(const SessionConfig& cfg) {
  OptimizerState s;
  s.config.kind = cfg.defender_optimizer;
  s.config.learning_rate = cfg.defender_lr;
  return s;
}

// --- holder A -------------------------------------------------------------

RoleOutcome role_holder_a(const SessionConfig& cfg, const RoleInput& input, Link& to_b,
                          Link& to_s) {
  require_input(input.x_train, "x_train", RoleId::HolderA);
  if (!input.predict_only) {
    require_input(input.y_train, "y_train", RoleId::HolderA);
    require_input(input.x_test, "x_test", RoleId::HolderA);
    require_input(input.y_test, "y_test", RoleId::HolderA);
  }

  const SessionId digest = cfg.digest();
  handshake_initiate(to_b, RoleId::HolderA, digest, {cfg.handshake_timeout});
  handshake_initiate(to_s, RoleId::HolderA, digest, {cfg.handshake_timeout});
  to_b.set_timeout(cfg.step_timeout);
  to_s.set_timeout(cfg.step_timeout);

  RoleOutcome out;
  {
    const ModelPartition init =
        input.warm_start != nullptr ? *input.warm_start : init_partition(cfg);
    out.parts.theta_a = init.theta_a;
    out.parts.shared_weights = init.shared_weights;
    out.parts.shared_biases = init.shared_biases;
    out.parts.output = init.output;
    out.parts.defender_a = init.defender_a;
  }
  HolderState st;
  st.opt = main_opt_state(cfg);
  st.defender_opt = defender_opt_state(cfg);

  TripleProvider provider(derive_seed(cfg.seed, "session-triples"));
  Rng share_rng(derive_seed(cfg.seed, "shares/a"));

  const auto schedule = detail::build_schedule(cfg, input.predict_only);
  const auto t0 = Clock::now();
  const bool defender_on = cfg.defender_enabled() && !input.predict_only;

  out.trace.config_digest = digest;
  out.trace.dataset_fingerprint = input.dataset_fingerprint;

  std::vector<double> test_scores, train_scores;
  uint64_t train_step = 0;
  uint64_t bytes_b_reported = 0;
  bool captured = false;

  for (size_t si = 0; si < schedule.size(); ++si) {
    const Step& step = schedule[si];
    const bool is_train = step.kind == StepKind::Train;
    const Tensor x_batch = (step.kind == StepKind::Train || step.kind == StepKind::ScoreTrain)
                               ? input.x_train->rows_subset(step.rows)
                               : input.x_test->rows_subset(step.rows);

    // Forward to the server.
    MpcForwardCaches mpc_caches;
    if (cfg.plaintext_first_layer) {
      to_s.send_real(MsgKind::ShareBlock, x_batch);
      to_s.send_real(MsgKind::ShareBlock, out.parts.theta_a);
    } else {
      ModelPartition parts_view;
      parts_view.shared_weights = out.parts.shared_weights;
      parts_view.shared_biases = out.parts.shared_biases;
      const FxMatrix z_share =
          mpc_cut_forward(PartyId::A, cfg, x_batch, out.parts.theta_a, parts_view,
                          provider, to_b, share_rng, &mpc_caches);
      to_s.send_ring(MsgKind::ShareBlock, z_share);
    }

    Tensor h_cut;
    if (is_train) h_cut = to_s.recv_real(MsgKind::HiddenActivations);
    const Tensor h_last = to_s.recv_real(MsgKind::HiddenActivations);
    DenseCache out_cache;
    const Tensor y_hat =
        dense_forward(h_last, out.parts.output, Activation::Sigmoid, &out_cache);

    if (step.kind == StepKind::Eval) {
      const Tensor y = detail::labels_to_tensor(*input.y_test, step.rows);
      // The cadence evaluation always follows a train step; its loss lands
      // on that step's row.
      if (!out.trace.steps.empty()) {
        out.trace.steps.back().test_loss = logistic_loss(y_hat, y).loss;
      }
      continue;
    }
    if (step.kind == StepKind::ScoreTest || step.kind == StepKind::ScoreTrain) {
      auto& dst = step.kind == StepKind::ScoreTest ? test_scores : train_scores;
      for (size_t r = 0; r < y_hat.rows(); ++r) dst.push_back(y_hat.at(r, 0));
      continue;
    }

    // Train step backward.
    ++train_step;
    const Tensor y = detail::labels_to_tensor(*input.y_train, step.rows);
    const LossResult loss = logistic_loss(y_hat, y);

    double d_a = 0.0;
    DefenderBackward def_bw;
    if (defender_on) {
      def_bw = defender_backward(out.parts.defender_a, h_cut, x_batch);
      d_a = def_bw.distance;
      to_s.send_real(MsgKind::Gradient, scale(def_bw.grad_h, -cfg.lambda));
    }

    const DenseGrads out_grads =
        dense_backward(loss.grad, out_cache, out.parts.output, Activation::Sigmoid);
    to_s.send_real(MsgKind::Gradient, out_grads.grad_input);

    Tensor grad_theta_a;
    CutGrads shared_grads;
    if (cfg.plaintext_first_layer) {
      grad_theta_a = to_s.recv_real(MsgKind::Gradient);
    } else {
      const Tensor g = to_s.recv_real(MsgKind::Gradient);
      Tensor delta = hadamard(
          g, activation_deriv_from_output(h_cut, cfg.hidden_acts[cfg.cut_layers - 1]));
      if (cfg.cut_layers > 1) {
        delta = mpc_shared_backward(PartyId::A, cfg, out.parts, mpc_caches, delta, to_b,
                                    &shared_grads);
      }
      grad_theta_a = matmul_tn(x_batch, delta);
    }

    if (input.capture_first_step_grads && !captured) {
      captured = true;
      out.captured.theta_a = grad_theta_a;
      out.captured.output = out_grads;
      out.captured.shared_weights = shared_grads.shared_weights;
      out.captured.shared_biases = shared_grads.shared_biases;
      if (defender_on) {
        out.captured.defender_a = def_bw.param_grads;
        for (auto& dg : out.captured.defender_a) {
          dg.grad_weights = scale(dg.grad_weights, -cfg.lambda);
          dg.grad_bias = scale(dg.grad_bias, -cfg.lambda);
        }
      }
    }

    // One optimizer step over A's main parameters.
    {
      std::vector<Tensor*> params{&out.parts.theta_a};
      std::vector<const Tensor*> grads{&grad_theta_a};
      for (size_t i = 0; i < out.parts.shared_weights.size(); ++i) {
        params.push_back(&out.parts.shared_weights[i]);
        grads.push_back(&shared_grads.shared_weights[i]);
        params.push_back(&out.parts.shared_biases[i]);
        grads.push_back(&shared_grads.shared_biases[i]);
      }
      params.push_back(&out.parts.output.weights);
      grads.push_back(&out_grads.grad_weights);
      params.push_back(&out.parts.output.bias);
      grads.push_back(&out_grads.grad_bias);
      optimizer_step(params, grads, st.opt);
    }
    if (defender_on) {
      defender_apply(out.parts.defender_a, def_bw.param_grads, st.defender_opt,
                     cfg.defender_literal_max);
    }

    // B's per-step stats: its defender distance and its server-channel bytes.
    std::vector<double> ds;
    std::vector<uint64_t> us;
    decode_f64_u64s(to_b.recv_expect(MsgKind::DefenderStats).payload, 1, 2, &ds, &us);
    bytes_b_reported = us[0] + us[1];

    TraceStep row;
    row.iteration = train_step;
    row.train_loss = loss.loss;
    row.test_loss = NAN;
    row.d_a = d_a;
    row.d_b = ds[0];
    row.elapsed_ms = input.record_wall_clock ? now_ms(t0) : 0.0;
    row.bytes_tx = to_b.channel().stats().bytes_sent() +
                   to_b.channel().stats().bytes_recv() +
                   to_s.channel().stats().bytes_sent() +
                   to_s.channel().stats().bytes_recv() + bytes_b_reported;
    out.final_train_loss = loss.loss;
    out.trace.steps.push_back(row);
  }

  if (!input.predict_only) {
    out.test_auc = auc(test_scores, *input.y_test);
    out.train_auc = auc(train_scores, *input.y_train);
  }
  out.test_scores = std::move(test_scores);

  // Orderly completion: both peers get a summary record.
  const auto summary = encode_f64_u64s({out.train_auc, out.test_auc},
                                       {static_cast<uint64_t>(train_step)});
  to_b.send(MsgKind::TraceRecord, summary);
  to_s.send(MsgKind::TraceRecord, summary);
  return out;
}

// --- holder B -------------------------------------------------------------

RoleOutcome role_holder_b(const SessionConfig& cfg, const RoleInput& input, Link& to_a,
                          Link& to_s) {
  require_input(input.x_train, "x_train", RoleId::HolderB);
  require_input(input.x_test, "x_test", RoleId::HolderB);

  const SessionId digest = cfg.digest();
  const RoleId peer_a = handshake_respond(to_a, RoleId::HolderB, digest,
                                          {cfg.handshake_timeout});
  P2N2_REQUIRE(peer_a == RoleId::HolderA, ProtocolError,
               "holder B expected holder A on its holder link, got ", role_name(peer_a));
  handshake_initiate(to_s, RoleId::HolderB, digest, {cfg.handshake_timeout});
  to_a.set_timeout(cfg.step_timeout);
  to_s.set_timeout(cfg.step_timeout);

  RoleOutcome out;
  {
    const ModelPartition init =
        input.warm_start != nullptr ? *input.warm_start : init_partition(cfg);
    out.parts.theta_b = init.theta_b;
    out.parts.defender_b = init.defender_b;
  }
  HolderState st;
  st.opt = main_opt_state(cfg);
  st.defender_opt = defender_opt_state(cfg);

  TripleProvider provider(derive_seed(cfg.seed, "session-triples"));
  Rng share_rng(derive_seed(cfg.seed, "shares/b"));

  const auto schedule = detail::build_schedule(cfg, input.predict_only);
  const bool defender_on = cfg.defender_enabled() && !input.predict_only;
  bool captured = false;

  for (const Step& step : schedule) {
    const bool is_train = step.kind == StepKind::Train;
    const Tensor x_batch = (step.kind == StepKind::Train || step.kind == StepKind::ScoreTrain)
                               ? input.x_train->rows_subset(step.rows)
                               : input.x_test->rows_subset(step.rows);

    MpcForwardCaches mpc_caches;
    if (cfg.plaintext_first_layer) {
      to_s.send_real(MsgKind::ShareBlock, x_batch);
      to_s.send_real(MsgKind::ShareBlock, out.parts.theta_b);
    } else {
      ModelPartition parts_view;  // B holds no shared-layer parameters
      const FxMatrix z_share =
          mpc_cut_forward(PartyId::B, cfg, x_batch, out.parts.theta_b, parts_view,
                          provider, to_a, share_rng, &mpc_caches);
      to_s.send_ring(MsgKind::ShareBlock, z_share);
    }

    if (!is_train) continue;

    const Tensor h_cut = to_s.recv_real(MsgKind::HiddenActivations);

    double d_b = 0.0;
    DefenderBackward def_bw;
    if (defender_on) {
      def_bw = defender_backward(out.parts.defender_b, h_cut, x_batch);
      d_b = def_bw.distance;
      to_s.send_real(MsgKind::Gradient, scale(def_bw.grad_h, -cfg.lambda));
    }

    Tensor grad_theta_b;
    if (cfg.plaintext_first_layer) {
      grad_theta_b = to_s.recv_real(MsgKind::Gradient);
    } else {
      const Tensor g = to_s.recv_real(MsgKind::Gradient);
      Tensor delta = hadamard(
          g, activation_deriv_from_output(h_cut, cfg.hidden_acts[cfg.cut_layers - 1]));
      if (cfg.cut_layers > 1) {
        delta = mpc_shared_backward(PartyId::B, cfg, out.parts, mpc_caches, delta, to_a,
                                    nullptr);
      }
      grad_theta_b = matmul_tn(x_batch, delta);
    }

    if (input.capture_first_step_grads && !captured) {
      captured = true;
      out.captured.theta_b = grad_theta_b;
      if (defender_on) {
        out.captured.defender_b = def_bw.param_grads;
        for (auto& dg : out.captured.defender_b) {
          dg.grad_weights = scale(dg.grad_weights, -cfg.lambda);
          dg.grad_bias = scale(dg.grad_bias, -cfg.lambda);
        }
      }
    }

    {
      std::vector<Tensor*> params{&out.parts.theta_b};
      std::vector<const Tensor*> grads{&grad_theta_b};
      optimizer_step(params, grads, st.opt);
    }
    if (defender_on) {
      defender_apply(out.parts.defender_b, def_bw.param_grads, st.defender_opt,
                     cfg.defender_literal_max);
    }

    const uint64_t tx = to_s.channel().stats().bytes_sent();
    const uint64_t rx = to_s.channel().stats().bytes_recv();
    to_a.send(MsgKind::DefenderStats, encode_f64_u64s({d_b}, {tx, rx}));
  }

  to_a.recv_expect(MsgKind::TraceRecord);
  return out;
}

// --- server ----------------------------------------------------------------

RoleOutcome role_server(const SessionConfig& cfg, const RoleInput& input, Link& to_a,
                        Link& to_b) {
  const SessionId digest = cfg.digest();
  // Identify the two inbound links by their announced roles; TCP accept
  // order is a race between the holders.
  const RoleId first = handshake_respond(to_a, RoleId::Server, digest,
                                         {cfg.handshake_timeout});
  const RoleId second = handshake_respond(to_b, RoleId::Server, digest,
                                          {cfg.handshake_timeout});
  P2N2_REQUIRE(first != second && first != RoleId::Server && second != RoleId::Server,
               ProtocolError, "server needs one connection from each holder");
  if (first == RoleId::HolderB) std::swap(to_a, to_b);
  to_a.set_timeout(cfg.step_timeout);
  to_b.set_timeout(cfg.step_timeout);

  RoleOutcome out;
  {
    const ModelPartition init =
        input.warm_start != nullptr ? *input.warm_start : init_partition(cfg);
    out.parts.cut_bias = init.cut_bias;
    out.parts.server = init.server;
  }
  OptimizerState opt = main_opt_state(cfg);

  const auto schedule = detail::build_schedule(cfg, input.predict_only);
  const bool defender_on = cfg.defender_enabled() && !input.predict_only;
  const Activation cut_act = cfg.hidden_acts[cfg.cut_layers - 1];
  bool captured = false;

  for (const Step& step : schedule) {
    const bool is_train = step.kind == StepKind::Train;

    Tensor h_cut;
    Tensor x_full;  // plaintext mode only
    if (cfg.plaintext_first_layer) {
      const Tensor x_a = to_a.recv_real(MsgKind::ShareBlock);
      const Tensor theta_a = to_a.recv_real(MsgKind::ShareBlock);
      const Tensor x_b = to_b.recv_real(MsgKind::ShareBlock);
      const Tensor theta_b = to_b.recv_real(MsgKind::ShareBlock);
      x_full = hcat(x_a, x_b);
      const Tensor z = matmul(x_full, vcat(theta_a, theta_b));
      h_cut = apply_activation(add_row_broadcast(z, out.parts.cut_bias), cut_act);
    } else {
      const FxMatrix za = to_a.recv_ring(MsgKind::ShareBlock);
      const FxMatrix zb = to_b.recv_ring(MsgKind::ShareBlock);
      P2N2_REQUIRE(za.rows() == zb.rows() && za.cols() == zb.cols(), ShapeError,
                   "holder share shapes disagree");
      const Tensor z = fx_decode_matrix(fx_add(za, zb), cfg.fx);
      h_cut = apply_activation(add_row_broadcast(z, out.parts.cut_bias), cut_act);
    }
    h_cut.require_finite("cut activations");

    if (is_train) {
      to_a.send_real(MsgKind::HiddenActivations, h_cut);
      to_b.send_real(MsgKind::HiddenActivations, h_cut);
    }

    std::vector<DenseCache> caches;
    const Tensor h_last = out.parts.server.forward(h_cut, is_train ? &caches : nullptr);
    to_a.send_real(MsgKind::HiddenActivations, h_last);

    if (!is_train) continue;

    Tensor term_a, term_b;
    if (defender_on) {
      term_a = to_a.recv_real(MsgKind::Gradient);
      term_b = to_b.recv_real(MsgKind::Gradient);
    }
    const Tensor g_hlast = to_a.recv_real(MsgKind::Gradient);

    std::vector<DenseGrads> server_grads;
    Tensor g_hcut = out.parts.server.backward(g_hlast, caches, &server_grads);
    if (defender_on) g_hcut = add(g_hcut, add(term_a, term_b));

    const Tensor delta_cut = hadamard(g_hcut, activation_deriv_from_output(h_cut, cut_act));
    const Tensor grad_cut_bias = col_sum(delta_cut);

    if (cfg.plaintext_first_layer) {
      // The full stacked gradient, sliced per holder; both the slicing and
      // the product mirror the monolithic path exactly.
      const Tensor grad_w1 = matmul_tn(x_full, delta_cut);
      const size_t da = cfg.dim_a;
      Tensor ga(da, grad_w1.cols());
      Tensor gb(grad_w1.rows() - da, grad_w1.cols());
      for (size_t r = 0; r < da; ++r)
        for (size_t c = 0; c < grad_w1.cols(); ++c) ga.at(r, c) = grad_w1.at(r, c);
      for (size_t r = 0; r < gb.rows(); ++r)
        for (size_t c = 0; c < grad_w1.cols(); ++c) gb.at(r, c) = grad_w1.at(da + r, c);
      to_a.send_real(MsgKind::Gradient, ga);
      to_b.send_real(MsgKind::Gradient, gb);
    } else {
      to_a.send_real(MsgKind::Gradient, g_hcut);
      to_b.send_real(MsgKind::Gradient, g_hcut);
    }

    if (input.capture_first_step_grads && !captured) {
      captured = true;
      out.captured.cut_bias = grad_cut_bias;
      out.captured.server = server_grads;
    }

    {
      std::vector<Tensor*> params{&out.parts.cut_bias};
      std::vector<const Tensor*> grads{&grad_cut_bias};
      for (size_t i = 0; i < out.parts.server.num_layers(); ++i) {
        params.push_back(&out.parts.server.layers()[i].weights);
        grads.push_back(&server_grads[i].grad_weights);
        params.push_back(&out.parts.server.layers()[i].bias);
        grads.push_back(&server_grads[i].grad_bias);
      }
      optimizer_step(params, grads, opt);
    }
  }

  to_a.recv_expect(MsgKind::TraceRecord);
  return out;
}

}  // namespace

RoleOutcome run_role(RoleId role, const SessionConfig& cfg, const RoleInput& input,
                     RoleChannels channels) {
  cfg.validate();
  const SessionId session = make_session_id(cfg.seed);
  Link la(channels.to_a, session, cfg.handshake_timeout);
  Link lb(channels.to_b, session, cfg.handshake_timeout);
  Link ls(channels.to_s, session, cfg.handshake_timeout);

  auto guard = [&](auto&& body) -> RoleOutcome {
    try {
      return body();
    } catch (const std::exception& e) {
      const std::string reason = std::string(role_name(role)) + ": " + e.what();
      if (la.valid()) la.send_abort(reason);
      if (lb.valid()) lb.send_abort(reason);
      if (ls.valid()) ls.send_abort(reason);
      if (la.valid()) la.close();
      if (lb.valid()) lb.close();
      if (ls.valid()) ls.close();
      throw;
    }
  };

  switch (role) {
    case RoleId::HolderA:
      return guard([&] { return role_holder_a(cfg, input, lb, ls); });
    case RoleId::HolderB:
      return guard([&] { return role_holder_b(cfg, input, la, ls); });
    case RoleId::Server:
      return guard([&] { return role_server(cfg, input, la, lb); });
  }
  raise<ConfigError>("bad role");
}

// ---------------------------------------------------------------------------
// Local simulation driver
// ---------------------------------------------------------------------------

namespace {

// Simulated crash: after the frame budget is spent, the channel hard-closes
// and the owning role dies without sending Abort frames, like a killed
// process would.
class FaultChannel final : public Channel {
 public:
  FaultChannel(ChannelPtr inner, std::shared_ptr<std::atomic<int64_t>> budget)
      : inner_(std::move(inner)), budget_(std::move(budget)) {}

  void send(const Message& m) override {
    spend();
    inner_->send(m);
    note_sent(m, kFrameHeaderSize + m.payload.size());
  }
  Message recv(std::chrono::milliseconds timeout) override {
    spend();
    Message m = inner_->recv(timeout);
    note_recv(m, kFrameHeaderSize + m.payload.size());
    return m;
  }
  void close() override { inner_->close(); }

 private:
  void spend() {
    if (budget_->fetch_sub(1) <= 0) {
      inner_->close();
      raise<ProtocolError>("injected fault: role killed");
    }
  }

  ChannelPtr inner_;
  std::shared_ptr<std::atomic<int64_t>> budget_;
};

struct RoleJob {
  RoleOutcome outcome;
  std::exception_ptr error;
};

}  // namespace

LocalSimResult train_split_local(const SessionConfig& cfg, const SplitData& data,
                                 const LocalSimOptions& opts) {
  auto mesh = make_local_mesh();

  if (opts.transcript != nullptr) {
    for (auto& rc : mesh) {
      if (rc.to_a) rc.to_a = with_transcript(rc.to_a, opts.transcript);
      if (rc.to_b) rc.to_b = with_transcript(rc.to_b, opts.transcript);
      if (rc.to_s) rc.to_s = with_transcript(rc.to_s, opts.transcript);
    }
  }
  if (cfg.throttle_bps > 0) {
    ThrottleSpec spec{cfg.throttle_bps, 64 * 1024};
    for (auto& rc : mesh) {
      if (rc.to_a) rc.to_a = throttle(rc.to_a, spec);
      if (rc.to_b) rc.to_b = throttle(rc.to_b, spec);
      if (rc.to_s) rc.to_s = throttle(rc.to_s, spec);
    }
  }
  if (opts.fault_role.has_value()) {
    auto budget = std::make_shared<std::atomic<int64_t>>(
        static_cast<int64_t>(opts.fault_after_frames));
    RoleChannels& rc = mesh[static_cast<size_t>(*opts.fault_role)];
    if (rc.to_a) rc.to_a = std::make_shared<FaultChannel>(rc.to_a, budget);
    if (rc.to_b) rc.to_b = std::make_shared<FaultChannel>(rc.to_b, budget);
    if (rc.to_s) rc.to_s = std::make_shared<FaultChannel>(rc.to_s, budget);
  }

  RoleInput in_a, in_b, in_s;
  in_a.x_train = &data.x_a_train;
  in_a.x_test = &data.x_a_test;
  in_a.y_train = &data.y_train;
  in_a.y_test = &data.y_test;
  in_b.x_train = &data.x_b_train;
  in_b.x_test = &data.x_b_test;
  in_a.dataset_fingerprint = data.fingerprint;
  for (RoleInput* in : {&in_a, &in_b, &in_s}) {
    in->record_wall_clock = opts.record_wall_clock;
    in->capture_first_step_grads = opts.capture_first_step_grads;
  }

  RoleJob ja, jb, js;
  auto runner = [&cfg](RoleId role, const RoleInput& input, RoleChannels ch, RoleJob* job) {
    try {
      job->outcome = run_role(role, cfg, input, std::move(ch));
    } catch (...) {
      job->error = std::current_exception();
    }
  };

  std::thread ta(runner, RoleId::HolderA, std::cref(in_a), mesh[0], &ja);
  std::thread tb(runner, RoleId::HolderB, std::cref(in_b), mesh[1], &jb);
  std::thread ts(runner, RoleId::Server, std::cref(in_s), mesh[2], &js);
  ta.join();
  tb.join();
  ts.join();

  for (RoleJob* job : {&ja, &jb, &js}) {
    if (job->error) std::rethrow_exception(job->error);
  }

  LocalSimResult result;
  result.outcome.partition.theta_a = std::move(ja.outcome.parts.theta_a);
  result.outcome.partition.shared_weights = std::move(ja.outcome.parts.shared_weights);
  result.outcome.partition.shared_biases = std::move(ja.outcome.parts.shared_biases);
  result.outcome.partition.output = std::move(ja.outcome.parts.output);
  result.outcome.partition.defender_a = std::move(ja.outcome.parts.defender_a);
  result.outcome.partition.theta_b = std::move(jb.outcome.parts.theta_b);
  result.outcome.partition.defender_b = std::move(jb.outcome.parts.defender_b);
  result.outcome.partition.cut_bias = std::move(js.outcome.parts.cut_bias);
  result.outcome.partition.server = std::move(js.outcome.parts.server);
  result.outcome.trace = std::move(ja.outcome.trace);
  result.outcome.final_train_loss = ja.outcome.final_train_loss;
  result.outcome.train_auc = ja.outcome.train_auc;
  result.outcome.test_auc = ja.outcome.test_auc;
  result.outcome.test_scores = std::move(ja.outcome.test_scores);

  result.captured.theta_a = std::move(ja.outcome.captured.theta_a);
  result.captured.output = std::move(ja.outcome.captured.output);
  result.captured.shared_weights = std::move(ja.outcome.captured.shared_weights);
  result.captured.shared_biases = std::move(ja.outcome.captured.shared_biases);
  result.captured.defender_a = std::move(ja.outcome.captured.defender_a);
  result.captured.theta_b = std::move(jb.outcome.captured.theta_b);
  result.captured.defender_b = std::move(jb.outcome.captured.defender_b);
  result.captured.cut_bias = std::move(js.outcome.captured.cut_bias);
  result.captured.server = std::move(js.outcome.captured.server);
  return result;
}

std::vector<double> predict_split_local(const SessionConfig& cfg,
                                        const ModelPartition& partition,
                                        const Tensor& x_a, const Tensor& x_b) {
  P2N2_REQUIRE(x_a.rows() == x_b.rows(), ShapeError,
               "holder batches disagree: ", x_a.rows(), " vs ", x_b.rows());
  SessionConfig pcfg = cfg;
  pcfg.n_test = x_a.rows();
  pcfg.n_train = std::max<size_t>(1, cfg.n_train);

  auto mesh = make_local_mesh();
  RoleInput in_a, in_b, in_s;
  in_a.x_train = &x_a;
  in_a.x_test = &x_a;
  in_b.x_train = &x_b;
  in_b.x_test = &x_b;
  for (RoleInput* in : {&in_a, &in_b, &in_s}) {
    in->warm_start = &partition;
    in->predict_only = true;
    in->record_wall_clock = false;
  }

  RoleJob ja, jb, js;
  auto runner = [&pcfg](RoleId role, const RoleInput& input, RoleChannels ch, RoleJob* job) {
    try {
      job->outcome = run_role(role, pcfg, input, std::move(ch));
    } catch (...) {
      job->error = std::current_exception();
    }
  };
  std::thread ta(runner, RoleId::HolderA, std::cref(in_a), mesh[0], &ja);
  std::thread tb(runner, RoleId::HolderB, std::cref(in_b), mesh[1], &jb);
  std::thread ts(runner, RoleId::Server, std::cref(in_s), mesh[2], &js);
  ta.join();
  tb.join();
  ts.join();
  for (RoleJob* job : {&ja, &jb, &js}) {
    if (job->error) std::rethrow_exception(job->error);
  }
  return ja.outcome.test_scores;
}

Tensor partition_forward(const ModelPartition& p, const SessionConfig& cfg,
                         const Tensor& x_a, const Tensor& x_b, Tensor* h_cut_out) {
  FullCaches caches;
  Tensor y_hat = detail::full_forward(p, cfg, x_a, x_b, &caches);
  if (h_cut_out != nullptr) *h_cut_out = caches.cut.h_cut;
  return y_hat;
}

}  // namespace p2n2
