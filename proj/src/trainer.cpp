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

#include "ccpr/trainer.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <tuple>

#include "ccpr/error.hpp"

namespace ccpr {

namespace {

struct Arrival {
  double time;
  WorkerId worker;
  std::size_t order;
};

}  // namespace

void validate(const TrainConfig& config) {
  if (config.iterations < 1) throw ConfigError("iterations T must be at least 1");
  if (!(config.eta > 0.0)) throw ConfigError("learning rate eta must be positive");
  if (!(config.q >= 0.0 && config.q < 1.0)) throw ConfigError("tolerance q must lie in [0, 1)");
  if (config.policy.kind == OrderPolicy::Kind::adaptive && config.policy.age_threshold < 1)
    throw ConfigError("adaptive policy needs a_th >= 1");
  validate(config.latency);
  if (config.profile.kind == StragglerProfile::Kind::persistent &&
      !(config.profile.alpha_straggler >= 0.0))
    throw ConfigError("straggler alpha must be non-negative");
}

Losses evaluate(const Vector& theta, const RegressionProblem& problem) {
  return {mse_loss(problem.x_train, problem.y_train, theta),
          mse_loss(problem.x_test, problem.y_test, theta)};
}

Vector apply_partial_update(const Vector& theta, const Recovery& recovery, const Vector& b,
                            double eta) {
  const std::size_t blocks = recovery.mask.size();
  if (blocks == 0 || theta.size() % static_cast<Eigen::Index>(blocks) != 0 ||
      theta.size() != b.size())
    throw DimensionError("theta, b and the recovery vector disagree in size");
  const Eigen::Index rows = theta.size() / static_cast<Eigen::Index>(blocks);
  Vector next = theta;
  for (std::size_t k = 0; k < blocks; ++k) {
    if (!recovery.mask[k]) continue;
    const Eigen::Index at = static_cast<Eigen::Index>(k) * rows;
    next.segment(at, rows) -= eta * (recovery.values[k] - b.segment(at, rows));
  }
  return next;
}

Trainer::Trainer(const RegressionProblem& problem, const BlockPartition& partition,
                 AssignmentMatrix assignment, TrainConfig config)
    : problem_(problem),
      partition_(partition),
      base_(std::move(assignment)),
      config_(std::move(config)),
      target_(0),
      rng_(config_.seed),
      theta_(Vector::Zero(static_cast<Eigen::Index>(problem.dim()))),
      ages_(partition.count) {
  validate(config_);
  if (base_.block_count() != partition_.count)
    throw ConfigError("assignment and partition disagree on K");
  if (partition_.count * partition_.block_rows != problem_.dim())
    throw ConfigError("partition does not match the problem dimension");
  if (config_.degrees.total() > base_.rows())
    throw ConfigError("degree vector " + config_.degrees.to_string() +
                      " exceeds the memory M=" + std::to_string(base_.rows()));
  for (WorkerId i : config_.profile.persistent_set)
    if (i >= base_.workers()) throw ConfigError("persistent straggler id out of range");
  if (config_.profile.kind == StragglerProfile::Kind::markov)
    chain_.emplace(make_chain(config_.profile, base_.workers()));
  target_ = recovery_target(partition_.count, config_.q);
}

IterationRecord Trainer::run_iteration() {
  IterationRecord rec;
  rec.t = ++t_;
  rec.shift_used = shift_;

  const AssignmentMatrix order = apply_order(base_, config_.policy, shift_);
  const std::vector<CodewordSpec> specs = encode(order, config_.degrees);
  const std::size_t messages = config_.degrees.size();

  if (chain_ && t_ > 1) chain_->step(rng_);

  std::vector<Arrival> arrivals;
  arrivals.reserve(specs.size());
  for (WorkerId i = 0; i < base_.workers(); ++i) {
    const LatencyParams params = effective_params(config_.profile, config_.latency,
                                                  base_.workers(), i,
                                                  chain_ ? &*chain_ : nullptr);
    const auto times = sample_completion_times(params, messages, rng_, config_.draw_mode);
    for (std::size_t l = 0; l < messages; ++l) arrivals.push_back({times[l], i, l});
  }
  std::sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) {
    return std::tie(a.time, a.worker, a.order) < std::tie(b.time, b.worker, b.order);
  });

  const Vector products = partition_.stacked_product(theta_);
  const auto rows = static_cast<Eigen::Index>(partition_.block_rows);
  PeelingDecoder decoder(partition_.count, partition_.block_rows, target_);
  std::vector<std::uint8_t> heard(base_.workers(), 0);

  for (const Arrival& a : arrivals) {
    if (decoder.complete()) break;
    const CodewordSpec& spec = specs[a.worker * messages + a.order];
    CodedResult result{spec, Vector::Zero(rows), a.time};
    for (BlockId k : spec.members)
      result.value += products.segment(static_cast<Eigen::Index>(k) * rows, rows);
    decoder.ingest(result);
    heard[a.worker] = 1;
    rec.wall_time = a.time;
  }
  rec.exhausted = !decoder.complete();
  rec.ingested = decoder.ingested_count();
  if (trace_) {
    *trace_ << "# iteration " << rec.t << " shift=" << rec.shift_used << '\n';
    decoder.write_trace(*trace_);
  }

  const Recovery recovery = decoder.finalize();
  theta_ = apply_partial_update(theta_, recovery, problem_.xty, config_.eta);
  const Losses losses = evaluate(theta_, problem_);
  rec.train_loss = losses.train;
  rec.test_loss = losses.test;
  rec.recovered = recovery.mask;
  rec.recovered_count = recovery.count();
  for (WorkerId i = 0; i < heard.size(); ++i)
    if (heard[i]) rec.responsive.push_back(i);

  ages_.update(rec.recovered);

  switch (config_.policy.kind) {
    case OrderPolicy::Kind::static_order:
      shift_ = 0;
      break;
    case OrderPolicy::Kind::fixed_shift:
      shift_ = fixed_shift_at(config_.policy, base_.rows(), t_);
      break;
    case OrderPolicy::Kind::adaptive:
      shift_ = select_adaptive_shift(base_, ages_.current(), config_.policy.age_threshold,
                                     rec.responsive)
                   .shift;
      break;
  }
  return rec;
}

TrainResult train(const RegressionProblem& problem, const BlockPartition& partition,
                  const AssignmentMatrix& assignment, const TrainConfig& config) {
  Trainer trainer(problem, partition, assignment, config);
  TrainResult result;
  result.records.reserve(config.iterations);
  for (std::size_t t = 0; t < config.iterations; ++t) {
    result.records.push_back(trainer.run_iteration());
    if (result.records.back().exhausted) ++result.exhausted_iterations;
  }
  result.ages = trainer.ages();
  result.theta = trainer.theta();
  return result;
}

std::vector<Losses> gradient_descent(const RegressionProblem& problem, double eta,
                                     std::size_t iterations) {
  std::vector<Losses> out;
  out.reserve(iterations);
  Vector theta = Vector::Zero(static_cast<Eigen::Index>(problem.dim()));
  for (std::size_t t = 0; t < iterations; ++t) {
    theta -= eta * full_gradient(problem, theta);
    out.push_back(evaluate(theta, problem));
  }
  return out;
}

void write_metrics_csv(std::ostream& out, const std::vector<IterationRecord>& records) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "t,wall_time,shift_used,recovered_count,train_loss,test_loss\n";
  for (const auto& r : records)
    out << r.t << ',' << r.wall_time << ',' << r.shift_used << ',' << r.recovered_count << ','
        << r.train_loss << ',' << r.test_loss << '\n';
  out.precision(old);
}

}  // namespace ccpr
