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

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "p2n2/data.hpp"
#include "p2n2/split.hpp"
#include "p2n2/synth.hpp"

namespace acceptance {

struct Criterion {
  std::string name;
  std::string title;
  std::function<bool(std::string* detail)> run;
};

std::vector<Criterion>& registry();

struct Register {
  Register(std::string name, std::string title,
           std::function<bool(std::string*)> fn) {
    registry().push_back({std::move(name), std::move(title), std::move(fn)});
  }
};

// Corpus paths; synthetic files are generated once per process into
// ./acceptance_data. Environment variables P2N2_FRAUD_CSV/P2N2_FRAUD_SCHEMA
// and P2N2_DISTRESS_CSV/P2N2_DISTRESS_SCHEMA substitute the original public
// datasets when they are available locally.
struct Corpus {
  std::string fraud_csv, fraud_schema;
  std::string distress_csv, distress_schema;
  std::string digits_images, digits_labels;
};

const Corpus& corpus();

// Loads, normalizes, and vertically splits a CSV corpus for one seed.
p2n2::SplitData load_vertical(const std::string& csv, const std::string& schema_path,
                              double test_frac, uint64_t seed, size_t max_rows = 0);

inline std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace acceptance
