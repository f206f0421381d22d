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

#include "p2n2/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "p2n2/session.hpp"

namespace p2n2 {

void SessionConfig::validate() const {
  P2N2_REQUIRE(!hidden_dims.empty(), ConfigError, "need at least one hidden layer");
  P2N2_REQUIRE(hidden_acts.size() == hidden_dims.size(), ConfigError,
               "hidden_acts length ", hidden_acts.size(), " != hidden_dims length ",
               hidden_dims.size());
  for (size_t d : hidden_dims) {
    P2N2_REQUIRE(d > 0, ConfigError, "hidden dims must be positive");
  }
  P2N2_REQUIRE(cut_layers >= 1 && cut_layers <= hidden_dims.size(), ConfigError,
               "cut_layers must be in [1,", hidden_dims.size(), "], got ", cut_layers);
  for (size_t l = 0; l + 1 < cut_layers; ++l) {
    P2N2_REQUIRE(hidden_acts[l] == Activation::Linear, ConfigError,
                 "hidden layer ", l + 1, " is computed over shares and must be linear ",
                 "(nonlinear activations before the cut are not supported); ",
                 "its activation is ", activation_name(hidden_acts[l]));
  }
  P2N2_REQUIRE(lambda >= 0.0, ConfigError, "lambda must be >= 0, got ", lambda);
  P2N2_REQUIRE(batch_size >= 1, ConfigError, "batch_size must be >= 1");
  P2N2_REQUIRE(epochs >= 1, ConfigError, "epochs must be >= 1");
  P2N2_REQUIRE(learning_rate > 0.0, ConfigError, "learning_rate must be positive");
  P2N2_REQUIRE(!plaintext_first_layer || cut_layers == 1, ConfigError,
               "plaintext_first_layer test mode supports cut_layers == 1 only");
  if (defender_enabled()) {
    P2N2_REQUIRE(!defender_widths.empty(), ConfigError,
                 "defender needs at least one hidden width");
  }
  fx.validate();
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string join_list(const std::vector<T>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) os << ',';
    os << v[i];
  }
  return os.str();
}

std::string join_acts(const std::vector<Activation>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) os << ',';
    os << activation_name(v[i]);
  }
  return os.str();
}

}  // namespace

std::string SessionConfig::canonical_text() const {
  std::ostringstream os;
  os << "batch_size=" << batch_size << '\n'
     << "clip_norm=" << fmt_double(clip_norm) << '\n'
     << "cut_layers=" << cut_layers << '\n'
     << "defender_enabled_override=" << (defender_enabled_override ? 1 : 0) << '\n'
     << "defender_literal_max=" << (defender_literal_max ? 1 : 0) << '\n'
     << "defender_lr=" << fmt_double(defender_lr) << '\n'
     << "defender_optimizer=" << (defender_optimizer == OptimizerKind::Adam ? "adam" : "sgd")
     << '\n'
     << "defender_widths=" << join_list(defender_widths) << '\n'
     << "dim_a=" << dim_a << '\n'
     << "dim_b=" << dim_b << '\n'
     << "epochs=" << epochs << '\n'
     << "eval_every=" << eval_every << '\n'
     << "eval_sample=" << eval_sample << '\n'
     << "frac_bits=" << fx.frac_bits << '\n'
     << "hidden_acts=" << join_acts(hidden_acts) << '\n'
     << "hidden_dims=" << join_list(hidden_dims) << '\n'
     << "lambda=" << fmt_double(lambda) << '\n'
     << "learning_rate=" << fmt_double(learning_rate) << '\n'
     << "mag_bound=" << fmt_double(fx.mag_bound) << '\n'
     << "n_test=" << n_test << '\n'
     << "n_train=" << n_train << '\n'
     << "optimizer=" << (optimizer == OptimizerKind::Adam ? "adam" : "sgd") << '\n'
     << "plaintext_first_layer=" << (plaintext_first_layer ? 1 : 0) << '\n'
     << "seed=" << seed << '\n';
  return os.str();
}

SessionId SessionConfig::digest() const { return digest_from_text(canonical_text()); }

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

size_t parse_size(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  P2N2_REQUIRE(end == v.c_str() + v.size() && !v.empty(), ConfigError,
               "bad integer '", v, "' for ", key);
  return static_cast<size_t>(x);
}

double parse_real(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  P2N2_REQUIRE(end == v.c_str() + v.size() && !v.empty(), ConfigError,
               "bad number '", v, "' for ", key);
  return x;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  raise<ConfigError>("bad boolean '", v, "' for ", key);
}

OptimizerKind parse_opt(const std::string& v, const std::string& key) {
  if (v == "sgd") return OptimizerKind::Sgd;
  if (v == "adam") return OptimizerKind::Adam;
  raise<ConfigError>("bad optimizer '", v, "' for ", key, " (sgd|adam)");
}

}  // namespace

SessionConfig parse_config_text(const std::string& text) {
  SessionConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    // strip comments and whitespace
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    P2N2_REQUIRE(eq != std::string::npos, ConfigError, "config line '", line,
                 "' is not key=value");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);

    if (key == "hidden_dims") {
      cfg.hidden_dims.clear();
      for (const auto& s : split_list(val)) cfg.hidden_dims.push_back(parse_size(s, key));
    } else if (key == "hidden_acts") {
      cfg.hidden_acts.clear();
      for (const auto& s : split_list(val)) cfg.hidden_acts.push_back(activation_from_string(s));
    } else if (key == "defender_widths") {
      cfg.defender_widths.clear();
      for (const auto& s : split_list(val)) cfg.defender_widths.push_back(parse_size(s, key));
    } else if (key == "cut_layers") {
      cfg.cut_layers = parse_size(val, key);
    } else if (key == "dim_a") {
      cfg.dim_a = parse_size(val, key);
    } else if (key == "dim_b") {
      cfg.dim_b = parse_size(val, key);
    } else if (key == "n_train") {
      cfg.n_train = parse_size(val, key);
    } else if (key == "n_test") {
      cfg.n_test = parse_size(val, key);
    } else if (key == "learning_rate") {
      cfg.learning_rate = parse_real(val, key);
    } else if (key == "optimizer") {
      cfg.optimizer = parse_opt(val, key);
    } else if (key == "clip_norm") {
      cfg.clip_norm = parse_real(val, key);
    } else if (key == "batch_size") {
      cfg.batch_size = parse_size(val, key);
    } else if (key == "epochs") {
      cfg.epochs = parse_size(val, key);
    } else if (key == "lambda") {
      cfg.lambda = parse_real(val, key);
    } else if (key == "defender_enabled_override") {
      cfg.defender_enabled_override = parse_bool(val, key);
    } else if (key == "defender_literal_max") {
      cfg.defender_literal_max = parse_bool(val, key);
    } else if (key == "defender_lr") {
      cfg.defender_lr = parse_real(val, key);
    } else if (key == "defender_optimizer") {
      cfg.defender_optimizer = parse_opt(val, key);
    } else if (key == "frac_bits") {
      cfg.fx.frac_bits = static_cast<int>(parse_size(val, key));
    } else if (key == "mag_bound") {
      cfg.fx.mag_bound = parse_real(val, key);
    } else if (key == "plaintext_first_layer") {
      cfg.plaintext_first_layer = parse_bool(val, key);
    } else if (key == "seed") {
      cfg.seed = parse_size(val, key);
    } else if (key == "eval_every") {
      cfg.eval_every = parse_size(val, key);
    } else if (key == "eval_sample") {
      cfg.eval_sample = parse_size(val, key);
    } else if (key == "handshake_timeout_ms") {
      cfg.handshake_timeout = std::chrono::milliseconds(parse_size(val, key));
    } else if (key == "step_timeout_ms") {
      cfg.step_timeout = std::chrono::milliseconds(parse_size(val, key));
    } else if (key == "throttle_bps") {
      cfg.throttle_bps = parse_size(val, key);
    } else {
      raise<ConfigError>("unknown config key '", key, "'");
    }
  }
  return cfg;
}

SessionConfig load_config(const std::string& path) {
  std::ifstream f(path);
  P2N2_REQUIRE(f.good(), IoError, "cannot open config '", path, "'");
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config_text(os.str());
}

std::string render_config(const SessionConfig& cfg) {
  std::ostringstream os;
  os << cfg.canonical_text();
  os << "handshake_timeout_ms=" << cfg.handshake_timeout.count() << '\n';
  os << "step_timeout_ms=" << cfg.step_timeout.count() << '\n';
  os << "throttle_bps=" << cfg.throttle_bps << '\n';
  return os.str();
}

}  // namespace p2n2
