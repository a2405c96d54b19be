// Copyright 2026 The ccpr-sim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ccpr/codec.hpp"
#include "ccpr/random.hpp"

namespace ccpr {

// Shifted-exponential computation time: finishing s unit computations takes
// s * (alpha + Y) with Y ~ Exp(mu).
struct LatencyParams {
  double mu = 10.0;     // 1/s
  double alpha = 0.01;  // s per unit computation
};

void validate(const LatencyParams& params);

// per_iteration draws a single Y per worker per iteration, so message s
// completes at s * (alpha + Y) and every marginal follows F_s exactly.
// per_message draws a fresh Y for every message and accumulates
// T_s = T_{s-1} + alpha + Y_s; it is kept as a sensitivity switch.
enum class DrawMode { per_iteration, per_message };

DrawMode parse_draw_mode(std::string_view text);

std::vector<double> sample_completion_times(const LatencyParams& params, std::size_t messages,
                                            Rng& rng,
                                            DrawMode mode = DrawMode::per_iteration);

// F_s(t) = 1 - exp(-mu (t/s - alpha)) for t >= s * alpha, else 0.
double completion_cdf(double t, std::size_t s, const LatencyParams& params);

enum class WorkerState : std::uint8_t { fast, slow };

// Per-worker two-state chain. Each call to step() flips every worker
// independently with probability p; only the rate mu depends on the state.
class MarkovStragglerModel {
 public:
  MarkovStragglerModel(double p, double mu_fast, double mu_slow,
                       std::vector<WorkerState> initial);

  // Returns the number of workers that switched state.
  std::size_t step(Rng& rng);

  WorkerState state(WorkerId worker) const { return states_.at(worker); }
  const std::vector<WorkerState>& states() const { return states_; }
  double rate(WorkerId worker) const {
    return state(worker) == WorkerState::fast ? mu_fast_ : mu_slow_;
  }
  double switch_probability() const { return p_; }
  std::size_t workers() const { return states_.size(); }

 private:
  double p_;
  double mu_fast_;
  double mu_slow_;
  std::vector<WorkerState> states_;
};

struct StragglerProfile {
  enum class Kind { homogeneous, persistent, markov };

  Kind kind = Kind::homogeneous;
  std::vector<WorkerId> persistent_set;  // persistent only
  double alpha_straggler = 10.0;         // persistent only

  // markov only; workers listed in initial_slow start in the slow state.
  double switch_p = 0.05;
  double mu_fast = 10.0;
  double mu_slow = 2.0;
  std::vector<WorkerId> initial_slow;
};

StragglerProfile::Kind parse_profile_kind(std::string_view text);
const char* to_string(StragglerProfile::Kind kind);

// Builds the chain for a Markov profile. Throws ConfigError when an id in
// initial_slow is out of range.
MarkovStragglerModel make_chain(const StragglerProfile& profile, std::size_t workers);

// Latency parameters of one worker in the current iteration. Markov profiles
// need the chain; other profiles ignore it. Throws ConfigError for an
// unknown worker id or a missing chain.
LatencyParams effective_params(const StragglerProfile& profile, const LatencyParams& base,
                               std::size_t workers, WorkerId worker,
                               const MarkovStragglerModel* markov = nullptr);

// `count` distinct worker ids drawn uniformly from [0, workers), sorted.
std::vector<WorkerId> draw_worker_subset(std::size_t workers, std::size_t count,
                                         std::uint64_t seed);

}  // namespace ccpr
