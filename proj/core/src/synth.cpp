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

#include "p2n2/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "p2n2/data.hpp"
#include "p2n2/errors.hpp"
#include "p2n2/rng.hpp"

namespace p2n2 {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::vector<double> random_unit(size_t d, Rng& rng) {
  std::vector<double> v(d);
  double norm = 0.0;
  for (auto& x : v) {
    x = rng.next_gaussian();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Threshold giving the requested positive rate on the sampled scores.
double quantile_threshold(std::vector<double> scores, double positive_rate) {
  std::sort(scores.begin(), scores.end());
  const size_t cut = static_cast<size_t>(
      std::llround((1.0 - positive_rate) * static_cast<double>(scores.size())));
  return scores[std::min(cut, scores.size() - 1)];
}

}  // namespace

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  P2N2_REQUIRE(f.good(), IoError, "cannot open '", path, "' for writing");
  f << text;
  P2N2_REQUIRE(f.good(), IoError, "short write to '", path, "'");
}

std::string write_fraud_like_csv(const std::string& path, size_t rows, uint64_t seed) {
  constexpr size_t kFeatures = 28;
  Rng task_rng(derive_seed(seed, "fraud-task"));
  const auto u1 = random_unit(kFeatures, task_rng);
  const auto u2 = random_unit(kFeatures, task_rng);
  const auto u3 = random_unit(kFeatures, task_rng);

  Rng rng(derive_seed(seed, "fraud-rows"));
  std::vector<std::vector<double>> x(rows, std::vector<double>(kFeatures));
  std::vector<double> score(rows);
  for (size_t r = 0; r < rows; ++r) {
    for (auto& v : x[r]) v = rng.next_gaussian();
    const double s = 2.0 * std::tanh(2.0 * dot(x[r], u1)) +
                     1.2 * std::tanh(2.0 * dot(x[r], u2)) -
                     0.9 * std::tanh(2.0 * dot(x[r], u3)) +
                     0.55 * rng.next_gaussian();
    score[r] = s;
  }
  const double tau = quantile_threshold(score, 0.08);

  std::string out;
  out.reserve(rows * kFeatures * 10);
  for (size_t c = 0; c < kFeatures; ++c) {
    char name[8];
    std::snprintf(name, sizeof(name), "f%02zu", c + 1);
    out += name;
    out += ',';
  }
  out += "class\n";
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < kFeatures; ++c) {
      // Per-column affine skew; normalization undoes it.
      const double v = x[r][c] * (1.0 + 0.1 * static_cast<double>(c)) +
                       0.15 * static_cast<double>(c);
      out += fmt(v);
      out += ',';
    }
    out += (score[r] > tau) ? '1' : '0';
    out += '\n';
  }
  write_text_file(path, out);
  return "label=class\n";
}

std::string write_distress_like_csv(const std::string& path, size_t rows, uint64_t seed) {
  constexpr size_t kNumeric = 73;
  // 12 categorical columns whose level counts sum to 483; with the numerics
  // that one-hot encodes to 556 feature columns.
  const size_t kLevels[12] = {50, 48, 45, 44, 42, 41, 40, 39, 38, 36, 32, 28};

  Rng task_rng(derive_seed(seed, "distress-task"));
  const auto w = random_unit(kNumeric, task_rng);
  const auto w2 = random_unit(kNumeric, task_rng);
  std::vector<std::vector<double>> level_effect(12);
  for (size_t c = 0; c < 12; ++c) {
    level_effect[c].resize(kLevels[c]);
    for (auto& e : level_effect[c]) e = 0.35 * task_rng.next_gaussian();
  }

  Rng rng(derive_seed(seed, "distress-rows"));
  std::vector<std::vector<double>> xn(rows, std::vector<double>(kNumeric));
  std::vector<std::vector<size_t>> xc(rows, std::vector<size_t>(12));
  std::vector<double> latent(rows);
  for (size_t r = 0; r < rows; ++r) {
    for (auto& v : xn[r]) v = rng.next_gaussian();
    double s = 2.3 * dot(xn[r], w) + 0.8 * std::tanh(2.0 * dot(xn[r], w2));
    for (size_t c = 0; c < 12; ++c) {
      xc[r][c] = rng.next_below(kLevels[c]);
      s += level_effect[c][xc[r][c]];
    }
    latent[r] = s + 0.35 * rng.next_gaussian();
  }
  // Scale/shift the latent so that "value <= -0.5" marks about 12% of rows,
  // mirroring a continuous target that gets thresholded downstream.
  const double tau = quantile_threshold(latent, 1.0 - 0.12);  // 12th percentile
  std::vector<double> sorted(latent);
  std::sort(sorted.begin(), sorted.end());
  const double lo_q = sorted[static_cast<size_t>(0.12 * static_cast<double>(rows))];
  (void)tau;

  std::string out;
  out.reserve(rows * 90 * 8);
  for (size_t c = 0; c < kNumeric; ++c) {
    char name[8];
    std::snprintf(name, sizeof(name), "x%02zu", c + 1);
    out += name;
    out += ',';
  }
  for (size_t c = 0; c < 12; ++c) {
    char name[8];
    std::snprintf(name, sizeof(name), "c%02zu", c + 1);
    out += name;
    out += ',';
  }
  out += "distress\n";
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < kNumeric; ++c) {
      out += fmt(xn[r][c] * (1.0 + 0.05 * static_cast<double>(c)));
      out += ',';
    }
    for (size_t c = 0; c < 12; ++c) {
      char lv[16];
      std::snprintf(lv, sizeof(lv), "L%03zu,", xc[r][c]);
      out += lv;
    }
    // Shift so the 12th percentile lands at -0.5: distressed rows are the
    // low tail, matching label_positive_if=le.
    out += fmt(latent[r] - lo_q - 0.5);
    out += '\n';
  }
  write_text_file(path, out);
  std::string cats;
  for (size_t c = 0; c < 12; ++c) {
    char name[8];
    std::snprintf(name, sizeof(name), "c%02zu", c + 1);
    if (c > 0) cats += ',';
    cats += name;
  }
  return "label=distress\ncategorical=" + cats +
         "\nlabel_threshold=-0.5\nlabel_positive_if=le\n";
}

void write_digits_like_idx(const std::string& images_path,
                           const std::string& labels_path, size_t count,
                           uint64_t seed) {
  constexpr size_t kSide = 28;
  constexpr size_t kPixels = kSide * kSide;
  constexpr size_t kClasses = 10;

  // Class templates: a handful of smooth bumps. Samples re-render their
  // class template under a per-sample translation, scale, and gain, the way
  // handwriting varies per instance; recovering a sample therefore needs
  // instance information, not just its class.
  struct Bump {
    double cx, cy, sx, sy, amp;
  };
  Rng proto_rng(derive_seed(seed, "digit-prototypes"));
  std::vector<std::vector<Bump>> protos(kClasses);
  for (auto& bumps : protos) {
    const int n = 3 + static_cast<int>(proto_rng.next_below(3));
    for (int b = 0; b < n; ++b) {
      bumps.push_back({proto_rng.uniform(8.0, 20.0), proto_rng.uniform(8.0, 20.0),
                       proto_rng.uniform(2.0, 4.5), proto_rng.uniform(2.0, 4.5),
                       proto_rng.uniform(0.6, 1.0)});
    }
  }

  Rng rng(derive_seed(seed, "digit-samples"));
  Tensor images(count, kPixels);
  std::vector<double> labels(count);
  for (size_t i = 0; i < count; ++i) {
    const size_t cls = rng.next_below(kClasses);
    labels[i] = static_cast<double>(cls);
    const double gain = rng.uniform(0.7, 1.0);
    const double shift_x = rng.uniform(-3.5, 3.5);
    const double shift_y = rng.uniform(-3.5, 3.5);
    const double zoom = rng.uniform(0.85, 1.2);
    for (size_t yy = 0; yy < kSide; ++yy) {
      for (size_t xx = 0; xx < kSide; ++xx) {
        double v = 0.0;
        for (const Bump& b : protos[cls]) {
          const double dx = (static_cast<double>(xx) - (b.cx * zoom + shift_x)) / b.sx;
          const double dy = (static_cast<double>(yy) - (b.cy * zoom + shift_y)) / b.sy;
          v += b.amp * std::exp(-0.5 * (dx * dx + dy * dy));
        }
        v = gain * std::min(1.0, v) + 0.05 * rng.next_gaussian();
        images.at(i, yy * kSide + xx) = std::min(1.0, std::max(0.0, v));
      }
    }
  }
  write_idx_images(images_path, images, kSide, kSide);
  write_idx_labels(labels_path, labels);
}

}  // namespace p2n2
