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

#include "support.hpp"

namespace acceptance {

namespace fs = std::filesystem;
using namespace p2n2;

std::vector<Criterion>& registry() {
  static std::vector<Criterion> r;
  return r;
}

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != 0 ? std::string(v) : fallback;
}

Corpus build_corpus() {
  const std::string dir = "acceptance_data";
  fs::create_directories(dir);
  Corpus c;

  c.fraud_csv = env_or("P2N2_FRAUD_CSV", dir + "/fraud.csv");
  c.fraud_schema = env_or("P2N2_FRAUD_SCHEMA", dir + "/fraud.schema");
  if (!fs::exists(c.fraud_csv)) {
    const std::string schema = write_fraud_like_csv(dir + "/fraud.csv", 40000, 20260101);
    write_text_file(dir + "/fraud.schema", schema);
  }

  c.distress_csv = env_or("P2N2_DISTRESS_CSV", dir + "/distress.csv");
  c.distress_schema = env_or("P2N2_DISTRESS_SCHEMA", dir + "/distress.schema");
  if (!fs::exists(c.distress_csv)) {
    const std::string schema =
        write_distress_like_csv(dir + "/distress.csv", 3672, 20260102);
    write_text_file(dir + "/distress.schema", schema);
  }

  c.digits_images = dir + "/digits-images.idx";
  c.digits_labels = dir + "/digits-labels.idx";
  if (!fs::exists(c.digits_images)) {
    write_digits_like_idx(c.digits_images, c.digits_labels, 2500, 20260103);
  }
  return c;
}

}  // namespace

const Corpus& corpus() {
  static Corpus c = build_corpus();
  return c;
}

SplitData load_vertical(const std::string& csv, const std::string& schema_path,
                        double test_frac, uint64_t seed, size_t max_rows) {
  const Schema schema = load_schema(schema_path);
  Dataset ds = load_csv(csv, schema);
  if (max_rows > 0 && ds.num_rows() > max_rows) {
    std::vector<size_t> keep(max_rows);
    for (size_t i = 0; i < max_rows; ++i) keep[i] = i;
    ds.features = ds.features.rows_subset(keep);
    ds.labels.resize(max_rows);
  }
  const EvalSplit eval = make_eval_split(ds.num_rows(), test_frac, seed);
  normalize(ds, eval);
  const SplitFeatures sf = vertical_split(ds, VerticalSplit::even(ds.num_features()));

  SplitData d;
  d.x_a_train = sf.features_a.rows_subset(eval.train_indices);
  d.x_b_train = sf.features_b.rows_subset(eval.train_indices);
  d.x_a_test = sf.features_a.rows_subset(eval.test_indices);
  d.x_b_test = sf.features_b.rows_subset(eval.test_indices);
  for (size_t r : eval.train_indices) d.y_train.push_back(sf.labels[r]);
  for (size_t r : eval.test_indices) d.y_test.push_back(sf.labels[r]);
  d.fingerprint = ds.fingerprint;
  return d;
}

}  // namespace acceptance
