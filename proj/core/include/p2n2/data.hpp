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

#include "p2n2/tensor.hpp"

namespace p2n2 {

// Declares how a CSV becomes a labeled dataset. Parsed from a key=value
// schema file:
//   label=<column>
//   categorical=<col1,col2,...>          (optional)
//   label_threshold=<real>               (optional; raw label is continuous)
//   label_positive_if=<le|ge>            (with label_threshold; default le)
struct Schema {
  std::string label_column;
  std::vector<std::string> categorical_columns;
  bool has_threshold = false;
  double label_threshold = 0.0;
  bool positive_if_le = true;
};

Schema load_schema(const std::string& path);
Schema parse_schema_text(const std::string& text);

struct Dataset {
  Tensor features;                  // n x d, encoded, optionally normalized
  std::vector<double> labels;       // n entries in {0,1}
  std::vector<std::string> feature_names;
  std::vector<double> norm_mean;    // per column; empty until normalize()
  std::vector<double> norm_std;
  uint64_t fingerprint = 0;         // content hash of the source bytes

  size_t num_rows() const { return features.rows(); }
  size_t num_features() const { return features.cols(); }
};

// Parses an RFC-4180-style CSV (header row required, quoted fields
// supported). Categorical columns one-hot encode against the sorted level
// set; every other column must parse as a number. Unparseable rows and
// missing values are reported with their line numbers. Deterministic:
// identical bytes yield an identical Dataset.
Dataset load_csv(const std::string& path, const Schema& schema);
Dataset parse_csv_text(const std::string& text, const Schema& schema);

// Disjoint, exhaustive train/test row split.
struct EvalSplit {
  std::vector<size_t> train_indices;
  std::vector<size_t> test_indices;
  double test_fraction = 0.2;
  uint64_t seed = 0;
};

EvalSplit make_eval_split(size_t n, double test_fraction, uint64_t seed);

// Z-score normalization in place using training-fold statistics only;
// constant columns map to zero. Test rows reuse the training stats.
void normalize(Dataset& ds, const EvalSplit& split);

// Column-wise partition of the feature space between the two holders.
struct VerticalSplit {
  std::vector<size_t> columns_a;
  std::vector<size_t> columns_b;

  void validate(size_t d) const;
  // ceil(d/2) columns to A, the rest to B.
  static VerticalSplit even(size_t d);
  static VerticalSplit first_k_to_a(size_t d, size_t k);
};

struct SplitFeatures {
  Tensor features_a;
  Tensor features_b;
  std::vector<double> labels;  // held by A only
};

SplitFeatures vertical_split(const Dataset& ds, const VerticalSplit& spec);

// Probability that a random positive outranks a random negative; ties count
// one half (rank-sum form). Throws RangeError when only one class is present.
double auc(const std::vector<double>& scores, const std::vector<double>& labels);

// IDX image/label container (the standard big-endian byte format).
Tensor read_idx_images(const std::string& path);          // n x (rows*cols), in [0,1]
std::vector<double> read_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const Tensor& images,
                      size_t img_rows, size_t img_cols);  // values in [0,1]
void write_idx_labels(const std::string& path, const std::vector<double>& labels);

uint64_t fingerprint_file(const std::string& path);
uint64_t fingerprint_bytes(const void* data, size_t len);

}  // namespace p2n2
