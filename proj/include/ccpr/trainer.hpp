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
#include <optional>
#include <ostream>
#include <vector>

#include "ccpr/age_metrics.hpp"
#include "ccpr/codec.hpp"
#include "ccpr/decoder.hpp"
#include "ccpr/latency.hpp"
#include "ccpr/problem.hpp"

namespace ccpr {

struct TrainConfig {
  std::size_t iterations = 400;
  double eta = 0.1;
  double q = 0.3;
  OrderPolicy policy;
  DegreeVector degrees{{1, 2, 3}};
  StragglerProfile profile;
  LatencyParams latency;
  DrawMode draw_mode = DrawMode::per_iteration;
  std::uint64_t seed = 1;  // latency and Markov stream
};

// Throws ConfigError unless 0 <= q < 1, eta > 0, T >= 1 and the latency
// parameters are valid.
void validate(const TrainConfig& config);

struct IterationRecord {
  std::size_t t = 0;         // 1-based
  double wall_time = 0.0;    // completion time of the stopping ingest
  std::vector<std::uint8_t> recovered;  // r_t
  double train_loss = 0.0;   // after the update
  double test_loss = 0.0;
  std::size_t shift_used = 0;
  std::size_t recovered_count = 0;
  std::size_t ingested = 0;
  std::vector<WorkerId> responsive;  // workers with >= 1 ingested result
  bool exhausted = false;    // every result ingested before reaching the target
};

struct Losses {
  double train = 0.0;
  double test = 0.0;
};

// Mean squared error on both splits.
Losses evaluate(const Vector& theta, const RegressionProblem& problem);

// Gradient step restricted to recovered blocks: block k of theta moves by
// -eta * (W_k theta - b_k) when r_t(k) = 1 and stays put otherwise.
Vector apply_partial_update(const Vector& theta, const Recovery& recovery, const Vector& b,
                            double eta);

// One simulated parameter-server run. Per iteration:
//   order -> encode -> sample latencies -> ingest results in time order until
//   the recovery target -> partial update -> ages -> next shift.
//
// RNG draw order per iteration: the Markov chain steps (from the second
// iteration on), then workers 0..n-1 each draw their L completion times.
class Trainer {
 public:
  Trainer(const RegressionProblem& problem, const BlockPartition& partition,
          AssignmentMatrix assignment, TrainConfig config);

  IterationRecord run_iteration();

  std::size_t iteration() const { return t_; }
  const Vector& theta() const { return theta_; }
  const AgeTable& ages() const { return ages_; }
  std::size_t next_shift() const { return shift_; }
  const AssignmentMatrix& assignment() const { return base_; }
  const TrainConfig& config() const { return config_; }

  // When set, every iteration's decoder trace is appended here.
  void set_trace(std::ostream* trace) { trace_ = trace; }

 private:
  const RegressionProblem& problem_;
  const BlockPartition& partition_;
  AssignmentMatrix base_;
  TrainConfig config_;
  std::size_t target_;
  Rng rng_;
  std::optional<MarkovStragglerModel> chain_;
  Vector theta_;
  AgeTable ages_;
  std::size_t shift_ = 0;
  std::size_t t_ = 0;
  std::ostream* trace_ = nullptr;
};

struct TrainResult {
  std::vector<IterationRecord> records;
  AgeTable ages{1};
  Vector theta;
  std::size_t exhausted_iterations = 0;
};

TrainResult train(const RegressionProblem& problem, const BlockPartition& partition,
                  const AssignmentMatrix& assignment, const TrainConfig& config);

// Plain full-gradient descent from theta = 0; losses after each step.
std::vector<Losses> gradient_descent(const RegressionProblem& problem, double eta,
                                     std::size_t iterations);

// metrics.csv: t,wall_time,shift_used,recovered_count,train_loss,test_loss
void write_metrics_csv(std::ostream& out, const std::vector<IterationRecord>& records);

}  // namespace ccpr
