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

#include "p2n2/message.hpp"

namespace p2n2 {

// One row per training step. test_loss is NaN on steps where the cadence
// evaluation did not run. elapsed_ms is zero in deterministic local-sim runs
// (wall-clock would break byte-identical artifacts) and real time otherwise.
struct TraceStep {
  uint64_t iteration = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;  // NaN when not measured
  double d_a = 0.0;
  double d_b = 0.0;
  double elapsed_ms = 0.0;
  uint64_t bytes_tx = 0;
};

struct TrainingTrace {
  std::vector<TraceStep> steps;
  SessionId config_digest{};
  uint64_t dataset_fingerprint = 0;
};

// Line-delimited text: '#'-prefixed provenance header, one column header
// line, then tab-separated rows.
std::string render_trace(const TrainingTrace& t);
void write_trace(const TrainingTrace& t, const std::string& path);
TrainingTrace parse_trace_text(const std::string& text);

std::string hex_of(const SessionId& id);

}  // namespace p2n2
