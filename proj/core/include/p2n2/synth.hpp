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

#include "p2n2/tensor.hpp"

namespace p2n2 {

// Deterministic synthetic corpora shaped like the evaluation datasets:
// a 28-feature imbalanced transaction table, an 85-raw-column table whose
// categoricals one-hot to 556 features with a continuous target, and a
// 10-class 28x28 digit-style image set. They let the full pipeline, the
// experiments, and CI run without redistributing the original data; the
// loaders accept the real files unchanged.

// Writes a CSV with 28 numeric feature columns f01..f28 and a 0/1 "class"
// column at roughly 8% positives. Returns the schema text for it.
std::string write_fraud_like_csv(const std::string& path, size_t rows, uint64_t seed);

// Writes a CSV with 73 numeric columns, 12 categorical columns (556 encoded
// features in total) and a continuous "distress" target; the matching schema
// declares label_threshold=-0.5 with positive_if=le. Returns the schema text.
std::string write_distress_like_csv(const std::string& path, size_t rows, uint64_t seed);

// Digit-style images: 10 smooth class prototypes plus per-sample jitter and
// pixel noise. Writes IDX image/label files; labels are the class ids 0..9.
void write_digits_like_idx(const std::string& images_path,
                           const std::string& labels_path, size_t count,
                           uint64_t seed);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace p2n2
