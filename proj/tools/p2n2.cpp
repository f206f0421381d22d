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

// Operator entry points: train a split model (in-process simulation or one
// networked role per process), evaluate a checkpoint, run the scaling
// benchmarks, run the input-recovery attack study, and generate the
// synthetic corpora the experiments use.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "p2n2/data.hpp"
#include "p2n2/defender.hpp"
#include "p2n2/split.hpp"
#include "p2n2/synth.hpp"
#include "p2n2/trace.hpp"

namespace fs = std::filesystem;
using namespace p2n2;

namespace {

struct CommonOpts {
  std::string dataset;
  std::string schema_path;
  std::string config_path;
  std::string out_dir = "out";
  uint64_t seed = 0;
  double lambda = -1.0;  // <0: keep config value
  int frac_bits = 0;     // 0: keep config value
  double test_frac = 0.2;
  size_t cols_a = 0;  // 0: even split
  std::string layers;
  std::string acts;
  double lr = 0.0;
  size_t batch = 0;
  size_t epochs = 0;
  std::string optimizer;
  uint64_t throttle_bps = 0;
};

void add_model_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--dataset", o.dataset, "CSV dataset path");
  cmd->add_option("--schema", o.schema_path, "schema file (label=..., categorical=...)");
  cmd->add_option("--config", o.config_path, "session config file");
  cmd->add_option("--out", o.out_dir, "output directory")->envname("P2N2_OUT");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--lambda", o.lambda, "defender weight");
  cmd->add_option("--frac-bits", o.frac_bits, "fixed-point fractional bits");
  cmd->add_option("--test-frac", o.test_frac, "held-out fraction");
  cmd->add_option("--cols-a", o.cols_a, "columns held by A (default: even split)");
  cmd->add_option("--layers", o.layers, "hidden dims, e.g. 8,8");
  cmd->add_option("--acts", o.acts, "hidden activations, e.g. sigmoid,relu");
  cmd->add_option("--lr", o.lr, "learning rate");
  cmd->add_option("--batch-size", o.batch, "mini-batch size");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--optimizer", o.optimizer, "sgd|adam");
  cmd->add_option("--throttle-bps", o.throttle_bps, "outbound throttle, bits/second");
}

SessionConfig build_config(const CommonOpts& o) {
  SessionConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path);
  if (o.seed != 0 || o.config_path.empty()) cfg.seed = o.seed;
  if (o.lambda >= 0.0) cfg.lambda = o.lambda;
  if (o.frac_bits > 0) cfg.fx.frac_bits = o.frac_bits;
  if (o.lr > 0.0) cfg.learning_rate = o.lr;
  if (o.batch > 0) cfg.batch_size = o.batch;
  if (o.epochs > 0) cfg.epochs = o.epochs;
  if (o.throttle_bps > 0) cfg.throttle_bps = o.throttle_bps;
  if (!o.optimizer.empty()) {
    cfg.optimizer = o.optimizer == "adam" ? OptimizerKind::Adam : OptimizerKind::Sgd;
  }
  if (!o.layers.empty()) {
    cfg.hidden_dims.clear();
    std::stringstream ss(o.layers);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.hidden_dims.push_back(std::stoul(tok));
    cfg.hidden_acts.assign(cfg.hidden_dims.size(), Activation::Sigmoid);
  }
  if (!o.acts.empty()) {
    cfg.hidden_acts.clear();
    std::stringstream ss(o.acts);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.hidden_acts.push_back(activation_from_string(tok));
  }
  return cfg;
}

struct LoadedData {
  SplitData split;
  Dataset ds;
  EvalSplit eval;
};

LoadedData load_split_dataset(const CommonOpts& o, uint64_t seed) {
  P2N2_REQUIRE(!o.dataset.empty(), ConfigError, "--dataset is required");
  P2N2_REQUIRE(!o.schema_path.empty(), ConfigError, "--schema is required");
  LoadedData out;
  const Schema schema = load_schema(o.schema_path);
  out.ds = load_csv(o.dataset, schema);
  out.eval = make_eval_split(out.ds.num_rows(), o.test_frac, seed);
  normalize(out.ds, out.eval);

  const size_t d = out.ds.num_features();
  const VerticalSplit vs =
      o.cols_a > 0 ? VerticalSplit::first_k_to_a(d, o.cols_a) : VerticalSplit::even(d);
  const SplitFeatures sf = vertical_split(out.ds, vs);

  out.split.x_a_train = sf.features_a.rows_subset(out.eval.train_indices);
  out.split.x_b_train = sf.features_b.rows_subset(out.eval.train_indices);
  out.split.x_a_test = sf.features_a.rows_subset(out.eval.test_indices);
  out.split.x_b_test = sf.features_b.rows_subset(out.eval.test_indices);
  for (size_t r : out.eval.train_indices) out.split.y_train.push_back(sf.labels[r]);
  for (size_t r : out.eval.test_indices) out.split.y_test.push_back(sf.labels[r]);
  out.split.fingerprint = out.ds.fingerprint;
  return out;
}

std::string seed_tag(uint64_t seed) { return "seed" + std::to_string(seed); }

void write_text(const std::string& path, const std::string& text) {
  write_text_file(path, text);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// --- train ------------------------------------------------------------------

int cmd_train(const CommonOpts& o, bool local_sim, bool baseline, size_t repetitions,
              const std::string& role_str, const std::string& listen,
              const std::string& peers) {
  fs::create_directories(o.out_dir);

  if (!local_sim) {
    P2N2_REQUIRE(!role_str.empty(), ConfigError,
                 "networked mode needs --role (or use --local-sim)");
    const RoleId role = role_from_string(role_str);
    SessionConfig cfg = build_config(o);

    Endpoint ep;
    ep.role = role;
    if (!listen.empty()) ep.listen = HostPort::parse(listen);
    std::stringstream ss(peers);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const auto eq = tok.find('=');
      P2N2_REQUIRE(eq != std::string::npos, ConfigError,
                   "--peers expects a=host:port,b=host:port,s=host:port");
      ep.peers[role_from_string(tok.substr(0, eq))] = HostPort::parse(tok.substr(eq + 1));
    }

    LoadedData data;
    RoleInput input;
    if (role != RoleId::Server) {
      data = load_split_dataset(o, cfg.seed);
      data.split.fill_config_dims(cfg);
      input.dataset_fingerprint = data.split.fingerprint;
      if (role == RoleId::HolderA) {
        input.x_train = &data.split.x_a_train;
        input.x_test = &data.split.x_a_test;
        input.y_train = &data.split.y_train;
        input.y_test = &data.split.y_test;
      } else {
        input.x_train = &data.split.x_b_train;
        input.x_test = &data.split.x_b_test;
      }
    } else {
      // The server carries no data; dims and row counts come from the config.
      P2N2_REQUIRE(cfg.dim_a > 0 && cfg.dim_b > 0 && cfg.n_train > 0, ConfigError,
                   "server role needs dim_a/dim_b/n_train/n_test in the config file");
    }
    input.record_wall_clock = true;

    RoleChannels channels = connect_role(ep, cfg.handshake_timeout);
    RoleOutcome outcome = run_role(role, cfg, input, std::move(channels));
    if (role == RoleId::HolderA) {
      write_trace(outcome.trace, o.out_dir + "/trace_" + seed_tag(cfg.seed) + ".tsv");
      std::cout << "train_auc=" << fmt(outcome.train_auc)
                << " test_auc=" << fmt(outcome.test_auc) << "\n";
    }
    std::cout << role_name(role) << ": session complete\n";
    return 0;
  }

  // Local simulation, optionally repeated over consecutive seeds.
  std::ostringstream summary;
  summary << "# p2n2-summary v1\n";
  summary << "dataset\tseed\tconfig_digest\tdataset_fp\tsplit_train_auc\t"
             "split_test_auc\tbaseline_train_auc\tbaseline_test_auc\n";
  double sum_split = 0.0, sum_base = 0.0;

  const std::string ds_name = fs::path(o.dataset).stem().string();
  for (size_t rep = 0; rep < repetitions; ++rep) {
    CommonOpts ro = o;
    ro.seed = o.seed + rep;
    SessionConfig cfg = build_config(ro);
    cfg.seed = ro.seed;
    LoadedData data = load_split_dataset(ro, cfg.seed);
    data.split.fill_config_dims(cfg);
    cfg.validate();

    const auto result = train_split_local(cfg, data.split);
    const auto& oc = result.outcome;
    write_trace(oc.trace, o.out_dir + "/trace_" + seed_tag(cfg.seed) + ".tsv");
    partition_to_checkpoint(oc.partition)
        .save(o.out_dir + "/model_" + seed_tag(cfg.seed) + ".p2n2");

    double base_train = NAN, base_test = NAN;
    if (baseline) {
      SessionConfig bcfg = cfg;
      bcfg.lambda = 0.0;
      bcfg.defender_enabled_override = false;
      const TrainOutcome mono = train_monolithic(bcfg, data.split);
      base_train = mono.train_auc;
      base_test = mono.test_auc;
      sum_base += base_test;
    }
    sum_split += oc.test_auc;

    char fp[32];
    std::snprintf(fp, sizeof(fp), "%016llx",
                  static_cast<unsigned long long>(data.split.fingerprint));
    summary << ds_name << '\t' << cfg.seed << '\t' << hex_of(cfg.digest()) << '\t' << fp
            << '\t' << fmt(oc.train_auc) << '\t' << fmt(oc.test_auc) << '\t'
            << (baseline ? fmt(base_train) : "-") << '\t'
            << (baseline ? fmt(base_test) : "-") << '\n';
    std::cout << ds_name << " seed=" << cfg.seed << " split_test_auc=" << fmt(oc.test_auc);
    if (baseline) std::cout << " baseline_test_auc=" << fmt(base_test);
    std::cout << "\n";
  }
  const double reps = static_cast<double>(repetitions);
  summary << "mean\t-\t-\t-\t-\t" << fmt(sum_split / reps) << "\t-\t"
          << (baseline ? fmt(sum_base / reps) : "-") << '\n';
  write_text(o.out_dir + "/summary.tsv", summary.str());
  return 0;
}

// --- eval ---------------------------------------------------------------------

int cmd_eval(const CommonOpts& o, const std::string& checkpoint_path) {
  fs::create_directories(o.out_dir);
  SessionConfig cfg = build_config(o);
  LoadedData data = load_split_dataset(o, cfg.seed);
  data.split.fill_config_dims(cfg);
  cfg.validate();

  const ModelPartition partition =
      partition_from_checkpoint(Checkpoint::load(checkpoint_path), cfg);
  const std::vector<double> scores =
      predict_split_local(cfg, partition, data.split.x_a_test, data.split.x_b_test);
  const double a = auc(scores, data.split.y_test);

  std::ostringstream out;
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(data.split.fingerprint));
  out << "# p2n2-scores v1\n# config_digest=" << hex_of(cfg.digest())
      << "\n# dataset_fp=" << fp << "\nscore\tlabel\n";
  for (size_t i = 0; i < scores.size(); ++i) {
    out << fmt(scores[i]) << '\t' << data.split.y_test[i] << '\n';
  }
  write_text(o.out_dir + "/scores.tsv", out.str());
  std::cout << "test_auc=" << fmt(a) << " rows=" << scores.size() << "\n";
  return 0;
}

// --- bench -------------------------------------------------------------------

int cmd_bench(const CommonOpts& o, const std::string& vary, bool baseline) {
  fs::create_directories(o.out_dir);
  CommonOpts bo = o;
  if (bo.batch == 0) bo.batch = 5000;
  SessionConfig cfg = build_config(bo);
  LoadedData data = load_split_dataset(bo, cfg.seed);

  const auto run_once = [&](SessionConfig rcfg, const SplitData& sd) {
    rcfg.seed = cfg.seed;
    SplitData copy = sd;
    copy.fill_config_dims(rcfg);
    rcfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    auto result = train_split_local(rcfg, copy);
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    uint64_t bytes = result.outcome.trace.steps.empty()
                         ? 0
                         : result.outcome.trace.steps.back().bytes_tx;
    return std::make_pair(secs, bytes);
  };

  std::ostringstream out;
  {
    SessionConfig hcfg = cfg;
    SplitData full = data.split;
    full.fill_config_dims(hcfg);
    char fp[32];
    std::snprintf(fp, sizeof(fp), "%016llx",
                  static_cast<unsigned long long>(data.split.fingerprint));
    out << "# config_digest=" << hex_of(hcfg.digest()) << "\n# dataset_fp=" << fp
        << "\n";
  }
  if (vary == "datasize") {
    out << "# p2n2-bench datasize\nfraction\trows\tseconds\n";
    for (double frac : {0.2, 0.4, 0.6, 0.8, 1.0}) {
      SplitData sd = data.split;
      const size_t rows = std::max<size_t>(
          cfg.batch_size,
          static_cast<size_t>(frac * static_cast<double>(data.split.x_a_train.rows())));
      std::vector<size_t> keep(std::min(rows, data.split.x_a_train.rows()));
      std::iota(keep.begin(), keep.end(), size_t{0});
      sd.x_a_train = data.split.x_a_train.rows_subset(keep);
      sd.x_b_train = data.split.x_b_train.rows_subset(keep);
      sd.y_train.assign(data.split.y_train.begin(),
                        data.split.y_train.begin() + static_cast<long>(keep.size()));
      const auto [secs, bytes] = run_once(cfg, sd);
      out << fmt(frac) << '\t' << keep.size() << '\t' << fmt(secs) << '\n';
      std::cout << "datasize " << fmt(frac) << " -> " << fmt(secs) << " s\n";
    }
    if (baseline) {
      const auto t0 = std::chrono::steady_clock::now();
      SessionConfig bcfg = cfg;
      SplitData sd = data.split;
      sd.fill_config_dims(bcfg);
      bcfg.lambda = 0.0;
      train_monolithic(bcfg, sd);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out << "# baseline_seconds=" << fmt(secs) << '\n';
      std::cout << "baseline -> " << fmt(secs) << " s\n";
    }
    write_text(o.out_dir + "/bench_datasize.tsv", out.str());
  } else if (vary == "bandwidth") {
    out << "# p2n2-bench bandwidth\nrate_bps\tseconds\tbytes\n";
    for (uint64_t mbit : {2ULL, 4ULL, 8ULL, 16ULL, 32ULL, 0ULL}) {
      SessionConfig rcfg = cfg;
      rcfg.throttle_bps = mbit * 1000000ULL;
      const auto [secs, bytes] = run_once(rcfg, data.split);
      out << rcfg.throttle_bps << '\t' << fmt(secs) << '\t' << bytes << '\n';
      std::cout << "bandwidth " << rcfg.throttle_bps << " bps -> " << fmt(secs) << " s\n";
    }
    write_text(o.out_dir + "/bench_bandwidth.tsv", out.str());
  } else {
    raise<ConfigError>("--vary must be datasize or bandwidth, got '", vary, "'");
  }
  return 0;
}

// --- attack-demo ---------------------------------------------------------------

VerticalSplit image_halves(size_t side) {
  VerticalSplit vs;
  for (size_t r = 0; r < side; ++r) {
    for (size_t c = 0; c < side; ++c) {
      (c < side / 2 ? vs.columns_a : vs.columns_b).push_back(r * side + c);
    }
  }
  return vs;
}

int cmd_attack_demo(const CommonOpts& o, const std::string& images_path,
                    const std::string& labels_path, size_t leak, size_t eval_n,
                    const std::string& sweep) {
  fs::create_directories(o.out_dir);
  // --lambda names the defended model's weight here; the undefended run is
  // always trained alongside it.
  const double lambda_star = o.lambda >= 0.0 ? o.lambda : 100.0;
  P2N2_REQUIRE(!images_path.empty() && !labels_path.empty(), ConfigError,
               "attack-demo needs --images and --labels IDX files (28x28 digit "
               "format; see `p2n2 gen-data --kind digits` for a synthetic set)");

  const Tensor images = read_idx_images(images_path);
  const std::vector<double> digits = read_idx_labels(labels_path);
  P2N2_REQUIRE(images.cols() == 784, ConfigError,
               "attack-demo expects 28x28 images, got ", images.cols(), " pixels");

  // Binary task over the digit classes.
  std::vector<double> labels(digits.size());
  for (size_t i = 0; i < digits.size(); ++i) labels[i] = digits[i] >= 5.0 ? 1.0 : 0.0;

  const EvalSplit eval = make_eval_split(images.rows(), 0.2, o.seed);
  const VerticalSplit halves = image_halves(28);

  Dataset ds;
  ds.features = images;
  ds.labels = labels;
  ds.fingerprint = fingerprint_file(images_path);
  const SplitFeatures sf = vertical_split(ds, halves);

  SplitData split;
  split.x_a_train = sf.features_a.rows_subset(eval.train_indices);
  split.x_b_train = sf.features_b.rows_subset(eval.train_indices);
  split.x_a_test = sf.features_a.rows_subset(eval.test_indices);
  split.x_b_test = sf.features_b.rows_subset(eval.test_indices);
  for (size_t r : eval.train_indices) split.y_train.push_back(labels[r]);
  for (size_t r : eval.test_indices) split.y_test.push_back(labels[r]);
  split.fingerprint = ds.fingerprint;

  CommonOpts ao = o;
  if (ao.layers.empty()) ao.layers = "64,32";
  SessionConfig cfg = build_config(ao);
  split.fill_config_dims(cfg);

  P2N2_REQUIRE(leak >= 100, ConfigError, "--leak must be at least 100 pairs");
  P2N2_REQUIRE(leak + eval_n <= split.x_a_train.rows() + split.x_a_test.rows(),
               ConfigError, "not enough records for leak + eval");

  const auto run_at_lambda = [&](double lam) {
    SessionConfig rcfg = cfg;
    rcfg.lambda = lam;
    rcfg.validate();
    return train_split_local(rcfg, split).outcome;
  };

  const auto attack = [&](const TrainOutcome& oc, double lam) {
    // Leaked pairs: the server's view of h for a slice of training records,
    // next to the private inputs it is assumed to have obtained.
    std::vector<size_t> leak_rows(leak);
    std::iota(leak_rows.begin(), leak_rows.end(), size_t{0});
    const Tensor xa = split.x_a_train.rows_subset(leak_rows);
    const Tensor xb = split.x_b_train.rows_subset(leak_rows);
    Tensor h_leak;
    partition_forward(oc.partition, cfg, xa, xb, &h_leak);

    AttackerConfig acfg;
    acfg.seed = derive_seed(cfg.seed, "attacker", static_cast<uint64_t>(lam * 1e6));
    const Mlp attacker = train_attacker(h_leak, hcat(xa, xb), acfg);

    std::vector<size_t> eval_rows(std::min(eval_n, split.x_a_test.rows()));
    std::iota(eval_rows.begin(), eval_rows.end(), size_t{0});
    const Tensor exa = split.x_a_test.rows_subset(eval_rows);
    const Tensor exb = split.x_b_test.rows_subset(eval_rows);
    Tensor h_eval;
    partition_forward(oc.partition, cfg, exa, exb, &h_eval);
    const RecoveryReport rep = recovery_report(attacker, h_eval, hcat(exa, exb));

    char name[64];
    std::snprintf(name, sizeof(name), "recovery_lambda%g.p2n2", lam);
    recovery_dump(rep, hcat(exa, exb)).save(o.out_dir + "/" + name);
    return rep;
  };

  std::ostringstream summary;
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(split.fingerprint));
  summary << "# p2n2-attack v1\n# config_digest=" << hex_of(cfg.digest())
          << "\n# dataset_fp=" << fp << "\nlambda\ttest_auc\tattack_mse\n";

  const TrainOutcome base = run_at_lambda(0.0);
  const RecoveryReport rep0 = attack(base, 0.0);
  summary << "0\t" << fmt(base.test_auc) << '\t' << fmt(rep0.mean_mse) << '\n';
  std::cout << "lambda=0 test_auc=" << fmt(base.test_auc)
            << " attack_mse=" << fmt(rep0.mean_mse) << "\n";

  const TrainOutcome defended = run_at_lambda(lambda_star);
  const RecoveryReport rep1 = attack(defended, lambda_star);
  summary << lambda_star << '\t' << fmt(defended.test_auc) << '\t' << fmt(rep1.mean_mse)
          << '\n';
  std::cout << "lambda=" << lambda_star << " test_auc=" << fmt(defended.test_auc)
            << " attack_mse=" << fmt(rep1.mean_mse)
            << " ratio=" << fmt(rep1.mean_mse / rep0.mean_mse) << "\n";
  write_text(o.out_dir + "/attack_summary.tsv", summary.str());

  if (!sweep.empty()) {
    const auto colon = sweep.find("..");
    P2N2_REQUIRE(colon != std::string::npos, ConfigError,
                 "--sweep-lambda expects lo..hi, e.g. 1e-5..1e-1");
    const double lo = std::strtod(sweep.substr(0, colon).c_str(), nullptr);
    const double hi = std::strtod(sweep.substr(colon + 2).c_str(), nullptr);
    P2N2_REQUIRE(lo > 0 && hi >= lo, ConfigError, "bad sweep range");
    std::ostringstream sw;
    sw << "# p2n2-lambda-sweep\n# config_digest=" << hex_of(cfg.digest())
       << "\n# dataset_fp=" << fp << "\nlambda\ttest_auc\n";
    for (double lam = lo; lam <= hi * 1.0000001; lam *= 10.0) {
      const TrainOutcome oc = run_at_lambda(lam);
      sw << lam << '\t' << fmt(oc.test_auc) << '\n';
      std::cout << "sweep lambda=" << lam << " test_auc=" << fmt(oc.test_auc) << "\n";
    }
    write_text(o.out_dir + "/lambda_sweep.tsv", sw.str());
  }
  return 0;
}

// --- gen-data -------------------------------------------------------------------

int cmd_gen_data(const std::string& kind, const std::string& out_dir, size_t rows,
                 uint64_t seed) {
  fs::create_directories(out_dir);
  if (kind == "fraud") {
    const std::string schema =
        write_fraud_like_csv(out_dir + "/fraud.csv", rows == 0 ? 40000 : rows, seed);
    write_text_file(out_dir + "/fraud.schema", schema);
    std::cout << "wrote " << out_dir << "/fraud.csv and fraud.schema\n";
  } else if (kind == "distress") {
    const std::string schema =
        write_distress_like_csv(out_dir + "/distress.csv", rows == 0 ? 3672 : rows, seed);
    write_text_file(out_dir + "/distress.schema", schema);
    std::cout << "wrote " << out_dir << "/distress.csv and distress.schema\n";
  } else if (kind == "digits") {
    write_digits_like_idx(out_dir + "/digits-images.idx", out_dir + "/digits-labels.idx",
                          rows == 0 ? 2500 : rows, seed);
    std::cout << "wrote " << out_dir << "/digits-{images,labels}.idx\n";
  } else {
    raise<ConfigError>("--kind must be fraud|distress|digits, got '", kind, "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privacy preserving split neural network trainer"};
  app.require_subcommand(1);

  CommonOpts train_o, eval_o, bench_o, attack_o;
  bool local_sim = false, baseline = false, bench_baseline = false;
  size_t repetitions = 1;
  std::string role_str, listen, peers;
  std::string checkpoint_path;
  std::string vary = "datasize";
  std::string images_path, labels_path, sweep;
  size_t leak = 300, eval_n = 200;
  std::string gen_kind, gen_out = "data";
  size_t gen_rows = 0;
  uint64_t gen_seed = 0;

  CLI::App* train = app.add_subcommand("train", "train a split model");
  add_model_flags(train, train_o);
  train->add_flag("--local-sim", local_sim, "run all three roles in-process");
  train->add_flag("--baseline", baseline, "also train the plaintext baseline");
  train->add_option("--repetitions", repetitions, "seeds seed..seed+n-1");
  train->add_option("--role", role_str, "holder-a|holder-b|server (networked mode)");
  train->add_option("--listen", listen, "host:port to accept on")->envname("P2N2_LISTEN");
  train->add_option("--peers", peers, "a=h:p,b=h:p,s=h:p")->envname("P2N2_PEERS");

  CLI::App* evalc = app.add_subcommand("eval", "score a held-out split with a checkpoint");
  add_model_flags(evalc, eval_o);
  evalc->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();

  CLI::App* bench = app.add_subcommand("bench", "scaling studies");
  add_model_flags(bench, bench_o);
  bench->add_option("--vary", vary, "datasize|bandwidth");
  bench->add_flag("--baseline", bench_baseline, "time the plaintext baseline too");

  CLI::App* attack = app.add_subcommand("attack-demo", "input recovery study");
  add_model_flags(attack, attack_o);
  attack->add_option("--images", images_path, "IDX image file");
  attack->add_option("--labels", labels_path, "IDX label file");
  attack->add_option("--leak", leak, "leaked training pairs");
  attack->add_option("--eval-records", eval_n, "disjoint eval records");
  attack->add_option("--sweep-lambda", sweep, "lo..hi, decades, e.g. 1e-5..1e-1");

  CLI::App* gen = app.add_subcommand("gen-data", "write synthetic datasets");
  gen->add_option("--kind", gen_kind, "fraud|distress|digits")->required();
  gen->add_option("--out", gen_out, "output directory")->envname("P2N2_OUT");
  gen->add_option("--rows", gen_rows, "row/record count (0 = default)");
  gen->add_option("--seed", gen_seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return cmd_train(train_o, local_sim, baseline, repetitions, role_str, listen, peers);
    }
    if (evalc->parsed()) return cmd_eval(eval_o, checkpoint_path);
    if (bench->parsed()) return cmd_bench(bench_o, vary, bench_baseline);
    if (attack->parsed()) {
      return cmd_attack_demo(attack_o, images_path, labels_path, leak, eval_n,
                             sweep);
    }
    if (gen->parsed()) return cmd_gen_data(gen_kind, gen_out, gen_rows, gen_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
