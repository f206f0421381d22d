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

#include "p2n2/trace.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "p2n2/errors.hpp"

namespace p2n2 {

std::string hex_of(const SessionId& id) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(id.size() * 2);
  for (uint8_t b : id) {
    out += digits[b >> 4];
    out += digits[b & 0xf];
  }
  return out;
}

std::string render_trace(const TrainingTrace& t) {
  std::ostringstream os;
  os << "# p2n2-trace v1\n";
  os << "# config_digest=" << hex_of(t.config_digest) << '\n';
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(t.dataset_fingerprint));
  os << "# dataset_fp=" << fp << '\n';
  os << "iteration\ttrain_loss\ttest_loss\td_a\td_b\telapsed_ms\tbytes_tx\n";
  char buf[64];
  for (const auto& s : t.steps) {
    os << s.iteration << '\t';
    std::snprintf(buf, sizeof(buf), "%.9g", s.train_loss);
    os << buf << '\t';
    if (std::isnan(s.test_loss)) {
      os << "nan";
    } else {
      std::snprintf(buf, sizeof(buf), "%.9g", s.test_loss);
      os << buf;
    }
    os << '\t';
    std::snprintf(buf, sizeof(buf), "%.9g", s.d_a);
    os << buf << '\t';
    std::snprintf(buf, sizeof(buf), "%.9g", s.d_b);
    os << buf << '\t';
    std::snprintf(buf, sizeof(buf), "%.3f", s.elapsed_ms);
    os << buf << '\t' << s.bytes_tx << '\n';
  }
  return os.str();
}

void write_trace(const TrainingTrace& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  P2N2_REQUIRE(f.good(), IoError, "cannot open '", path, "' for writing");
  f << render_trace(t);
  P2N2_REQUIRE(f.good(), IoError, "short write to '", path, "'");
}

TrainingTrace parse_trace_text(const std::string& text) {
  TrainingTrace t;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    TraceStep s;
    char test_buf[32];
    unsigned long long iter = 0, bytes = 0;
    const int n = std::sscanf(line.c_str(), "%llu\t%lf\t%31s\t%lf\t%lf\t%lf\t%llu",
                              &iter, &s.train_loss, test_buf, &s.d_a, &s.d_b,
                              &s.elapsed_ms, &bytes);
    P2N2_REQUIRE(n == 7, IoError, "bad trace row: '", line, "'");
    s.iteration = iter;
    s.bytes_tx = bytes;
    s.test_loss = (std::strcmp(test_buf, "nan") == 0) ? NAN : std::strtod(test_buf, nullptr);
    t.steps.push_back(s);
  }
  return t;
}

}  // namespace p2n2
