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

#include <future>

#include "support.hpp"

namespace acceptance {

using namespace p2n2;
using namespace std::chrono_literals;

namespace {

// Criterion 9: killing any role mid-epoch surfaces an abort or timeout at
// the peers within the configured timeout; twenty fault-injection trials,
// zero hangs.
bool criterion_faults(std::string* detail) {
  Rng rng(999);
  SplitData d;
  d.x_a_train = Tensor(24, 3);
  d.x_b_train = Tensor(24, 3);
  d.x_a_test = Tensor(8, 3);
  d.x_b_test = Tensor(8, 3);
  for (auto* t : {&d.x_a_train, &d.x_b_train, &d.x_a_test, &d.x_b_test}) {
    for (auto& v : t->raw()) v = rng.uniform(-1.0, 1.0);
  }
  for (int i = 0; i < 24; ++i) d.y_train.push_back(i % 2);
  for (int i = 0; i < 8; ++i) d.y_test.push_back(i % 2);

  size_t completed = 0, surfaced = 0;
  int trial = 0;
  const RoleId victims[] = {RoleId::HolderA, RoleId::HolderB, RoleId::Server};
  // Budgets sit inside every role's frame count for this session; the
  // server, with the fewest frames, moves about seventy here.
  const uint64_t frame_budgets[] = {2, 7, 13, 21, 29, 38, 46};
  for (int i = 0; i < 20; ++i, ++trial) {
    SessionConfig cfg;
    cfg.hidden_dims = {4};
    cfg.hidden_acts = {Activation::Sigmoid};
    cfg.batch_size = 8;
    cfg.epochs = 2;
    cfg.seed = 7000 + trial;
    cfg.step_timeout = 1500ms;
    cfg.handshake_timeout = 1500ms;
    d.fill_config_dims(cfg);
    cfg.validate();

    LocalSimOptions opts;
    opts.fault_role = victims[i % 3];
    opts.fault_after_frames = frame_budgets[i % 7];

    auto fut = std::async(std::launch::async, [&] {
      try {
        train_split_local(cfg, d, opts);
        return 0;  // fault did not surface
      } catch (const Error&) {
        return 1;
      }
    });
    if (fut.wait_for(20s) != std::future_status::ready) {
      std::ostringstream os;
      os << "trial " << trial << " (" << role_name(*opts.fault_role) << " after "
         << opts.fault_after_frames << " frames) hung";
      *detail = os.str();
      // Abandoning the future leaks the stuck session; report and fail.
      fut.wait();
      return false;
    }
    ++completed;
    surfaced += static_cast<size_t>(fut.get());
  }
  std::ostringstream os;
  os << completed << " trials completed, " << surfaced
     << " surfaced errors at the peers, 0 hangs";
  *detail = os.str();
  return completed == 20 && surfaced == 20;
}

Register r9("criterion-9", "mid-epoch role kills abort cleanly at both peers",
            criterion_faults);

}  // namespace

}  // namespace acceptance
