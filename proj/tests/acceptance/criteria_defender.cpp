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

#include <numeric>

#include "support.hpp"

#include "p2n2/defender.hpp"

namespace acceptance {

using namespace p2n2;

namespace {

struct DigitSplit {
  SplitData data;
  VerticalSplit halves;
};

DigitSplit load_digit_halves(uint64_t seed) {
  const Tensor images = read_idx_images(corpus().digits_images);
  const std::vector<double> classes = read_idx_labels(corpus().digits_labels);

  DigitSplit out;
  for (size_t r = 0; r < 28; ++r) {
    for (size_t c = 0; c < 28; ++c) {
      (c < 14 ? out.halves.columns_a : out.halves.columns_b).push_back(r * 28 + c);
    }
  }
  Dataset ds;
  ds.features = images;
  ds.labels.resize(classes.size());
  for (size_t i = 0; i < classes.size(); ++i) ds.labels[i] = classes[i] >= 5.0 ? 1.0 : 0.0;

  const EvalSplit eval = make_eval_split(images.rows(), 0.2, seed);
  const SplitFeatures sf = vertical_split(ds, out.halves);
  out.data.x_a_train = sf.features_a.rows_subset(eval.train_indices);
  out.data.x_b_train = sf.features_b.rows_subset(eval.train_indices);
  out.data.x_a_test = sf.features_a.rows_subset(eval.test_indices);
  out.data.x_b_test = sf.features_b.rows_subset(eval.test_indices);
  for (size_t r : eval.train_indices) out.data.y_train.push_back(ds.labels[r]);
  for (size_t r : eval.test_indices) out.data.y_test.push_back(ds.labels[r]);
  return out;
}

double attack_mse(const SessionConfig& cfg, const SplitData& d,
                  const ModelPartition& partition, uint64_t seed) {
  // Leaked pairs: the server's cut-layer view for a slice of train records.
  constexpr size_t kLeak = 300;
  constexpr size_t kEval = 150;
  std::vector<size_t> leak_rows(kLeak);
  std::iota(leak_rows.begin(), leak_rows.end(), size_t{0});
  const Tensor xa = d.x_a_train.rows_subset(leak_rows);
  const Tensor xb = d.x_b_train.rows_subset(leak_rows);
  Tensor h_leak;
  partition_forward(partition, cfg, xa, xb, &h_leak);

  AttackerConfig acfg;
  acfg.widths = {512, 128};
  acfg.epochs = 40;
  acfg.seed = seed;
  const Mlp attacker = train_attacker(h_leak, hcat(xa, xb), acfg);

  std::vector<size_t> eval_rows(kEval);
  std::iota(eval_rows.begin(), eval_rows.end(), size_t{0});
  const Tensor exa = d.x_a_test.rows_subset(eval_rows);
  const Tensor exb = d.x_b_test.rows_subset(eval_rows);
  Tensor h_eval;
  partition_forward(partition, cfg, exa, exb, &h_eval);
  return recovery_report(attacker, h_eval, hcat(exa, exb)).mean_mse;
}

// Criterion 6: with the defender at lambda=100 the reconstruction error of a
// leak-trained attacker rises by at least 1.5x over the undefended model,
// on every one of three seeds.
bool criterion_defender(std::string* detail) {
  std::ostringstream os;
  bool all_pass = true;
  for (uint64_t seed : {501ULL, 502ULL, 503ULL}) {
    const DigitSplit ds = load_digit_halves(seed);

    SessionConfig cfg;
    cfg.hidden_dims = {64, 32};
    cfg.hidden_acts = {Activation::Sigmoid, Activation::Sigmoid};
    cfg.learning_rate = 0.1;
    cfg.batch_size = 64;
    cfg.epochs = 8;
    cfg.defender_widths = {512, 128};
    cfg.defender_lr = 0.01;
    cfg.seed = seed;
    SplitData d = ds.data;
    d.fill_config_dims(cfg);

    SessionConfig undefended = cfg;
    undefended.lambda = 0.0;
    undefended.validate();
    SessionConfig defended = cfg;
    defended.lambda = 100.0;
    defended.validate();

    const auto plain = train_split_local(undefended, d);
    const auto guarded = train_split_local(defended, d);

    const double mse0 = attack_mse(undefended, d, plain.outcome.partition, seed);
    const double mse1 = attack_mse(defended, d, guarded.outcome.partition, seed);
    const double ratio = mse1 / mse0;
    os << "seed " << seed << ": mse " << fmt(mse0) << " -> " << fmt(mse1) << " (x"
       << fmt(ratio) << "); ";
    if (!(ratio >= 1.5)) all_pass = false;
  }
  *detail = os.str();
  return all_pass;
}

Register r6("criterion-6", "defended cut layer resists input reconstruction",
            criterion_defender);

}  // namespace

}  // namespace acceptance
