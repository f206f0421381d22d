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

#include "p2n2/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "p2n2/errors.hpp"
#include "p2n2/rng.hpp"

namespace p2n2 {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  P2N2_REQUIRE(f.good(), IoError, "cannot open '", path, "'");
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

// One CSV record; handles quotes and embedded commas. Returns false at end
// of input.
bool next_record(const std::string& text, size_t& pos, std::vector<std::string>* fields,
                 size_t* line_no) {
  fields->clear();
  if (pos >= text.size()) return false;
  std::string cur;
  bool in_quotes = false;
  bool any = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          cur += '"';
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
      ++pos;
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      ++pos;
      any = true;
      continue;
    }
    if (c == ',') {
      fields->push_back(cur);
      cur.clear();
      ++pos;
      any = true;
      continue;
    }
    if (c == '\n' || c == '\r') {
      if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      ++*line_no;
      if (!any && cur.empty()) continue;  // skip blank lines
      fields->push_back(cur);
      return true;
    }
    cur += c;
    ++pos;
    any = true;
  }
  if (any || !cur.empty()) {
    fields->push_back(cur);
    ++*line_no;
    return true;
  }
  return false;
}

double parse_number(const std::string& s, size_t line_no, const std::string& col) {
  const std::string t = trim(s);
  P2N2_REQUIRE(!t.empty(), IoError, "line ", line_no, ": missing value in column '",
               col, "'");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  P2N2_REQUIRE(end == t.c_str() + t.size(), IoError, "line ", line_no,
               ": cannot parse '", t, "' in column '", col, "' as a number");
  P2N2_REQUIRE(std::isfinite(v), IoError, "line ", line_no, ": non-finite value in '",
               col, "'");
  return v;
}

}  // namespace

Schema parse_schema_text(const std::string& text) {
  Schema s;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    P2N2_REQUIRE(eq != std::string::npos, ConfigError, "schema line '", line,
                 "' is not key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "label") {
      s.label_column = val;
    } else if (key == "categorical") {
      s.categorical_columns = split_commas(val);
    } else if (key == "label_threshold") {
      s.has_threshold = true;
      s.label_threshold = parse_number(val, 0, "label_threshold");
    } else if (key == "label_positive_if") {
      P2N2_REQUIRE(val == "le" || val == "ge", ConfigError,
                   "label_positive_if must be le or ge, got '", val, "'");
      s.positive_if_le = (val == "le");
    } else {
      raise<ConfigError>("unknown schema key '", key, "'");
    }
  }
  P2N2_REQUIRE(!s.label_column.empty(), ConfigError, "schema must declare label=<col>");
  return s;
}

Schema load_schema(const std::string& path) { return parse_schema_text(read_file(path)); }

Dataset parse_csv_text(const std::string& text, const Schema& schema) {
  P2N2_REQUIRE(!text.empty(), IoError, "empty CSV input");

  size_t pos = 0;
  size_t line_no = 0;
  std::vector<std::string> header;
  P2N2_REQUIRE(next_record(text, pos, &header, &line_no), IoError,
               "CSV has no header row");
  for (auto& h : header) h = trim(h);

  int label_idx = -1;
  std::set<std::string> categorical(schema.categorical_columns.begin(),
                                    schema.categorical_columns.end());
  std::vector<bool> is_cat(header.size(), false);
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == schema.label_column) label_idx = static_cast<int>(i);
    if (categorical.count(header[i]) > 0) is_cat[i] = true;
  }
  P2N2_REQUIRE(label_idx >= 0, IoError, "label column '", schema.label_column,
               "' not found in CSV header");
  for (const auto& c : schema.categorical_columns) {
    P2N2_REQUIRE(std::find(header.begin(), header.end(), c) != header.end(), ConfigError,
                 "categorical column '", c, "' not found in CSV header");
  }

  // First pass: collect rows as strings and categorical level sets.
  std::vector<std::vector<std::string>> rows;
  std::vector<std::set<std::string>> levels(header.size());
  std::vector<std::string> fields;
  while (next_record(text, pos, &fields, &line_no)) {
    P2N2_REQUIRE(fields.size() == header.size(), IoError, "line ", line_no, ": ",
                 fields.size(), " fields, header has ", header.size());
    for (size_t i = 0; i < fields.size(); ++i) {
      if (is_cat[i]) {
        const std::string v = trim(fields[i]);
        P2N2_REQUIRE(!v.empty(), IoError, "line ", line_no,
                     ": missing categorical value in '", header[i], "'");
        levels[i].insert(v);
      }
    }
    rows.push_back(fields);
  }
  P2N2_REQUIRE(!rows.empty(), IoError, "CSV has a header but no data rows");

  // Output layout: header order, categoricals expanded in place over their
  // sorted level sets.
  std::vector<std::string> out_names;
  std::vector<size_t> col_offset(header.size(), 0);
  for (size_t i = 0; i < header.size(); ++i) {
    if (static_cast<int>(i) == label_idx) continue;
    col_offset[i] = out_names.size();
    if (is_cat[i]) {
      for (const auto& lv : levels[i]) out_names.push_back(header[i] + "=" + lv);
    } else {
      out_names.push_back(header[i]);
    }
  }

  Dataset ds;
  ds.feature_names = out_names;
  ds.features = Tensor(rows.size(), out_names.size());
  ds.labels.resize(rows.size());

  for (size_t r = 0; r < rows.size(); ++r) {
    const size_t ln = r + 2;  // 1-based, after header
    for (size_t i = 0; i < header.size(); ++i) {
      if (static_cast<int>(i) == label_idx) continue;
      if (is_cat[i]) {
        const std::string v = trim(rows[r][i]);
        const auto& lset = levels[i];
        const size_t k =
            static_cast<size_t>(std::distance(lset.begin(), lset.find(v)));
        ds.features.at(r, col_offset[i] + k) = 1.0;
      } else {
        ds.features.at(r, col_offset[i]) = parse_number(rows[r][i], ln, header[i]);
      }
    }
    const double raw = parse_number(rows[r][label_idx], ln, schema.label_column);
    double y;
    if (schema.has_threshold) {
      y = (schema.positive_if_le ? raw <= schema.label_threshold
                                 : raw >= schema.label_threshold)
              ? 1.0
              : 0.0;
    } else {
      P2N2_REQUIRE(raw == 0.0 || raw == 1.0, IoError, "line ", ln,
                   ": label must be 0 or 1 (declare label_threshold for "
                   "continuous targets), got ", raw);
      y = raw;
    }
    ds.labels[r] = y;
  }
  ds.fingerprint = fingerprint_bytes(text.data(), text.size());
  return ds;
}

Dataset load_csv(const std::string& path, const Schema& schema) {
  return parse_csv_text(read_file(path), schema);
}

EvalSplit make_eval_split(size_t n, double test_fraction, uint64_t seed) {
  P2N2_REQUIRE(n >= 2, ConfigError, "need at least 2 rows to split");
  P2N2_REQUIRE(test_fraction > 0.0 && test_fraction < 1.0, ConfigError,
               "test fraction must be in (0,1), got ", test_fraction);
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  Rng rng(derive_seed(seed, "eval-split"));
  rng.shuffle(idx);
  size_t n_test = static_cast<size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::min(std::max<size_t>(n_test, 1), n - 1);
  EvalSplit s;
  s.test_fraction = test_fraction;
  s.seed = seed;
  s.test_indices.assign(idx.begin(), idx.begin() + static_cast<long>(n_test));
  s.train_indices.assign(idx.begin() + static_cast<long>(n_test), idx.end());
  return s;
}

void normalize(Dataset& ds, const EvalSplit& split) {
  const size_t d = ds.num_features();
  ds.norm_mean.assign(d, 0.0);
  ds.norm_std.assign(d, 1.0);
  const double n_train = static_cast<double>(split.train_indices.size());
  P2N2_REQUIRE(n_train >= 2, ConfigError, "normalization needs >= 2 training rows");
  for (size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (size_t r : split.train_indices) mean += ds.features.at(r, c);
    mean /= n_train;
    double var = 0.0;
    for (size_t r : split.train_indices) {
      const double dv = ds.features.at(r, c) - mean;
      var += dv * dv;
    }
    var /= n_train;
    const double sd = std::sqrt(var);
    ds.norm_mean[c] = mean;
    ds.norm_std[c] = sd;
    if (sd < 1e-12) {
      // Constant column: map everything to zero.
      for (size_t r = 0; r < ds.num_rows(); ++r) ds.features.at(r, c) = 0.0;
    } else {
      for (size_t r = 0; r < ds.num_rows(); ++r) {
        ds.features.at(r, c) = (ds.features.at(r, c) - mean) / sd;
      }
    }
  }
}

void VerticalSplit::validate(size_t d) const {
  std::vector<bool> seen(d, false);
  for (size_t c : columns_a) {
    P2N2_REQUIRE(c < d && !seen[c], ConfigError, "vertical split: bad/duplicate column ",
                 c, " in A's set");
    seen[c] = true;
  }
  for (size_t c : columns_b) {
    P2N2_REQUIRE(c < d && !seen[c], ConfigError,
                 "vertical split: column ", c, " overlaps or is out of range");
    seen[c] = true;
  }
  for (size_t c = 0; c < d; ++c) {
    P2N2_REQUIRE(seen[c], ConfigError, "vertical split: column ", c, " unassigned");
  }
  P2N2_REQUIRE(!columns_a.empty() && !columns_b.empty(), ConfigError,
               "each holder needs at least one column");
}

VerticalSplit VerticalSplit::even(size_t d) {
  return first_k_to_a(d, (d + 1) / 2);
}

VerticalSplit VerticalSplit::first_k_to_a(size_t d, size_t k) {
  P2N2_REQUIRE(k >= 1 && k < d, ConfigError, "A's column count ", k,
               " must be in [1,", d - 1, "]");
  VerticalSplit vs;
  for (size_t c = 0; c < k; ++c) vs.columns_a.push_back(c);
  for (size_t c = k; c < d; ++c) vs.columns_b.push_back(c);
  return vs;
}

SplitFeatures vertical_split(const Dataset& ds, const VerticalSplit& spec) {
  spec.validate(ds.num_features());
  SplitFeatures out;
  out.features_a = ds.features.cols_subset(spec.columns_a);
  out.features_b = ds.features.cols_subset(spec.columns_b);
  out.labels = ds.labels;
  return out;
}

double auc(const std::vector<double>& scores, const std::vector<double>& labels) {
  P2N2_REQUIRE(scores.size() == labels.size(), ShapeError,
               "auc: ", scores.size(), " scores vs ", labels.size(), " labels");
  size_t n_pos = 0, n_neg = 0;
  for (double y : labels) {
    P2N2_REQUIRE(y == 0.0 || y == 1.0, RangeError, "auc labels must be 0/1");
    (y == 1.0 ? n_pos : n_neg) += 1;
  }
  P2N2_REQUIRE(n_pos > 0 && n_neg > 0, RangeError,
               "auc undefined: need both classes, got ", n_pos, " positives / ",
               n_neg, " negatives");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Average ranks across tie groups, then the rank-sum statistic.
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1.0) pos_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

namespace {

uint32_t read_be32(std::istream& f, const char* what) {
  uint8_t b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  P2N2_REQUIRE(f.good(), IoError, "truncated IDX file while reading ", what);
  return (static_cast<uint32_t>(b[0]) << 24) | (static_cast<uint32_t>(b[1]) << 16) |
         (static_cast<uint32_t>(b[2]) << 8) | static_cast<uint32_t>(b[3]);
}

void write_be32(std::ostream& f, uint32_t v) {
  const uint8_t b[4] = {static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
                        static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Tensor read_idx_images(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  P2N2_REQUIRE(f.good(), IoError, "cannot open '", path, "'");
  const uint32_t magic = read_be32(f, "magic");
  P2N2_REQUIRE(magic == 0x00000803u, IoError, "'", path,
               "' is not an IDX image file (magic ", magic, ")");
  const uint32_t n = read_be32(f, "count");
  const uint32_t rows = read_be32(f, "rows");
  const uint32_t cols = read_be32(f, "cols");
  P2N2_REQUIRE(n > 0 && rows > 0 && cols > 0, IoError, "IDX dims are zero");
  Tensor out(n, static_cast<size_t>(rows) * cols);
  std::vector<uint8_t> buf(out.size());
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  P2N2_REQUIRE(f.gcount() == static_cast<std::streamsize>(buf.size()), IoError,
               "truncated IDX pixel data in '", path, "'");
  for (size_t i = 0; i < buf.size(); ++i) out.data()[i] = buf[i] / 255.0;
  return out;
}

std::vector<double> read_idx_labels(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  P2N2_REQUIRE(f.good(), IoError, "cannot open '", path, "'");
  const uint32_t magic = read_be32(f, "magic");
  P2N2_REQUIRE(magic == 0x00000801u, IoError, "'", path,
               "' is not an IDX label file (magic ", magic, ")");
  const uint32_t n = read_be32(f, "count");
  std::vector<uint8_t> buf(n);
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
  P2N2_REQUIRE(f.gcount() == static_cast<std::streamsize>(n), IoError,
               "truncated IDX label data in '", path, "'");
  return std::vector<double>(buf.begin(), buf.end());
}

void write_idx_images(const std::string& path, const Tensor& images, size_t img_rows,
                      size_t img_cols) {
  P2N2_REQUIRE(images.cols() == img_rows * img_cols, ShapeError,
               "image tensor cols ", images.cols(), " != ", img_rows, "*", img_cols);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  P2N2_REQUIRE(f.good(), IoError, "cannot open '", path, "' for writing");
  write_be32(f, 0x00000803u);
  write_be32(f, static_cast<uint32_t>(images.rows()));
  write_be32(f, static_cast<uint32_t>(img_rows));
  write_be32(f, static_cast<uint32_t>(img_cols));
  std::vector<uint8_t> buf(images.size());
  for (size_t i = 0; i < images.size(); ++i) {
    double v = images.data()[i];
    v = std::min(1.0, std::max(0.0, v));
    buf[i] = static_cast<uint8_t>(std::lround(v * 255.0));
  }
  f.write(reinterpret_cast<const char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  P2N2_REQUIRE(f.good(), IoError, "short write to '", path, "'");
}

void write_idx_labels(const std::string& path, const std::vector<double>& labels) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  P2N2_REQUIRE(f.good(), IoError, "cannot open '", path, "' for writing");
  write_be32(f, 0x00000801u);
  write_be32(f, static_cast<uint32_t>(labels.size()));
  for (double y : labels) {
    const auto b = static_cast<uint8_t>(y);
    f.write(reinterpret_cast<const char*>(&b), 1);
  }
  P2N2_REQUIRE(f.good(), IoError, "short write to '", path, "'");
}

uint64_t fingerprint_bytes(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t fingerprint_file(const std::string& path) {
  const std::string bytes = read_file(path);
  return fingerprint_bytes(bytes.data(), bytes.size());
}

}  // namespace p2n2
