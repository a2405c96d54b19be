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

#include <algorithm>
#include <set>
#include <sstream>

#include "ccpr/error.hpp"
#include "ccpr/trainer.hpp"
#include "doctest.h"

using namespace ccpr;

namespace {

struct Desk {
  RegressionProblem problem;
  BlockPartition partition;
};

Desk desk(std::size_t dim, std::size_t K, std::uint64_t seed = 5) {
  Desk d;
  d.problem = generate_problem(ProblemParams{4 * dim, dim, dim, 0.0}, seed);
  d.partition = partition_blocks(d.problem, K);
  return d;
}

TrainConfig persistent_config(std::size_t stragglers) {
  TrainConfig c;
  c.profile.kind = StragglerProfile::Kind::persistent;
  for (WorkerId i = 0; i < stragglers; ++i) c.profile.persistent_set.push_back(i);
  return c;
}

}  // namespace

TEST_CASE("q = 0 without stragglers is plain gradient descent") {
  const auto d = desk(20, 4);
  TrainConfig c;
  c.iterations = 50;
  c.q = 0.0;
  c.degrees = DegreeVector({1, 2});
  Trainer trainer(d.problem, d.partition, build_rcs(4, 4, 3, 17), c);

  Vector theta = Vector::Zero(20);
  const Matrix W = d.problem.x_train.transpose() * d.problem.x_train;
  const Vector b = d.problem.x_train.transpose() * d.problem.y_train;
  for (std::size_t t = 0; t < c.iterations; ++t) {
    theta = theta - c.eta * (W * theta - b);
    const auto rec = trainer.run_iteration();
    CHECK(rec.recovered_count == 4);
    CHECK((trainer.theta() - theta).norm() <= 1e-9 * std::max(1.0, theta.norm()));
  }
}

TEST_CASE("the PS stops as soon as the target is met") {
  const auto d = desk(40, 40);
  TrainConfig c = persistent_config(15);
  c.iterations = 30;
  Trainer trainer(d.problem, d.partition, build_rcs(40, 40, 6, 3), c);
  for (std::size_t t = 0; t < c.iterations; ++t) {
    const auto rec = trainer.run_iteration();
    CHECK(rec.recovered_count >= 28);
    CHECK_FALSE(rec.exhausted);
    CHECK(rec.ingested <= 40 * 3);
    CHECK(rec.wall_time < 10.0);  // nothing from a persistent straggler
    for (WorkerId i : rec.responsive) CHECK(i >= 15);
  }
}

TEST_CASE("wall time matches a hand trace of the arrivals") {
  // K=4, 2 workers, M=2, m=[1,1]: every message is a single block, so the
  // stopping time is the arrival that brings the distinct blocks to 2.
  const auto d = desk(8, 4);
  const auto a = build_rcs(4, 2, 2, 99);
  TrainConfig c;
  c.iterations = 1;
  c.q = 0.5;
  c.degrees = DegreeVector({1, 1});
  c.seed = 1234;

  Rng replay(c.seed);
  std::exponential_distribution<double> exp(c.latency.mu);
  struct Hit {
    double time;
    std::size_t worker, order;
  };
  std::vector<Hit> hits;
  for (std::size_t i = 0; i < 2; ++i) {
    const double unit = c.latency.alpha + exp(replay);
    hits.push_back({unit, i, 0});
    hits.push_back({2 * unit, i, 1});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.time < y.time; });
  std::set<std::size_t> seen;
  double expected = 0.0;
  for (const auto& h : hits) {
    seen.insert(a.at(h.order, h.worker));
    expected = h.time;
    if (seen.size() == 2) break;
  }

  Trainer trainer(d.problem, d.partition, a, c);
  const auto rec = trainer.run_iteration();
  CHECK(rec.wall_time == expected);
  CHECK(rec.recovered_count == 2);
}

TEST_CASE("apply_partial_update") {
  const Vector theta = (Vector(4) << 1, 2, 3, 4).finished();
  const Vector b = (Vector(4) << 1, 1, 1, 1).finished();
  Recovery all{{1, 1}, {(Vector(2) << 2, 2).finished(), (Vector(2) << 3, 5).finished()}};
  CHECK(apply_partial_update(theta, all, b, 0.5) == (Vector(4) << 0.5, 1.5, 2, 2).finished());

  Recovery none{{0, 0}, {Vector(), Vector()}};
  CHECK(apply_partial_update(theta, none, b, 0.5) == theta);

  Recovery first{{1, 0, 0, 0}, {(Vector(1) << 3).finished(), Vector(), Vector(), Vector()}};
  CHECK(apply_partial_update(theta, first, b, 0.1) == (Vector(4) << 0.8, 2, 3, 4).finished());

  CHECK_THROWS_AS(apply_partial_update(theta, Recovery{{1, 1, 1}, {}}, b, 0.1), DimensionError);
}

TEST_CASE("evaluate") {
  const auto d = desk(20, 4);
  const auto at_star = evaluate(d.problem.theta_star, d.problem);
  CHECK(at_star.train == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(at_star.test == doctest::Approx(0.0).epsilon(1e-12));

  const auto zero = evaluate(Vector::Zero(20), d.problem);
  CHECK(zero.train == doctest::Approx(d.problem.y_train.squaredNorm() / (2.0 * 80)));
  CHECK(zero.test == doctest::Approx(d.problem.y_test.squaredNorm() / (2.0 * 20)));

  const Vector theta = Vector::Ones(20);
  double sum = 0.0;
  for (Eigen::Index n = 0; n < d.problem.x_test.rows(); ++n) {
    double r = d.problem.y_test(n);
    for (Eigen::Index j = 0; j < 20; ++j) r -= d.problem.x_test(n, j) * theta(j);
    sum += r * r;
  }
  CHECK(evaluate(theta, d.problem).test == doctest::Approx(sum / 40.0));
}

TEST_CASE("a looser tolerance never stops later") {
  const auto d = desk(40, 40);
  const auto a = build_rcs(40, 40, 6, 8);
  std::vector<std::vector<double>> stop;
  for (double q : {0.0, 0.1, 0.2, 0.3}) {
    TrainConfig c = persistent_config(0);
    c.iterations = 20;
    c.q = q;
    c.seed = 31;
    const auto r = train(d.problem, d.partition, a, c);
    stop.emplace_back();
    for (const auto& rec : r.records) stop.back().push_back(rec.wall_time);
  }
  for (std::size_t i = 1; i < stop.size(); ++i)
    for (std::size_t t = 0; t < stop[i].size(); ++t) CHECK(stop[i][t] <= stop[i - 1][t]);
}

TEST_CASE("same seed, same run") {
  const auto d = desk(40, 40);
  const auto a = build_rcs(40, 40, 6, 8);
  TrainConfig c = persistent_config(15);
  c.iterations = 30;
  c.policy = OrderPolicy::adaptive(2);
  const auto r1 = train(d.problem, d.partition, a, c);
  const auto r2 = train(d.problem, d.partition, a, c);
  std::ostringstream m1, m2;
  write_metrics_csv(m1, r1.records);
  write_metrics_csv(m2, r2.records);
  CHECK(m1.str() == m2.str());
  CHECK(r1.theta == r2.theta);
  CHECK(r1.ages.history() == r2.ages.history());
}

TEST_CASE("RCS-1 spreads recoveries evenly without stragglers") {
  const auto d = desk(40, 40);
  TrainConfig c;
  c.iterations = 400;
  c.policy = OrderPolicy::fixed_shift();
  const auto r = train(d.problem, d.partition, build_rcs(40, 40, 6, 12), c);
  std::vector<double> freq(40, 0.0);
  for (const auto& rec : r.records)
    for (std::size_t k = 0; k < 40; ++k) freq[k] += rec.recovered[k];
  double mean = 0.0;
  for (double f : freq) mean += f / 40.0;
  for (double f : freq) CHECK(std::abs(f - mean) <= 0.2 * mean);
}

TEST_CASE("shift bookkeeping per policy") {
  const auto d = desk(40, 40);
  const auto a = build_rcs(40, 40, 6, 2);
  TrainConfig c = persistent_config(15);
  c.iterations = 12;
  c.policy = OrderPolicy::fixed_shift();
  const auto r = train(d.problem, d.partition, a, c);
  for (const auto& rec : r.records) CHECK(rec.shift_used == (rec.t - 1) % 6);

  c.policy = OrderPolicy::static_order();
  for (const auto& rec : train(d.problem, d.partition, a, c).records) CHECK(rec.shift_used == 0);
}

TEST_CASE("trainer configuration errors") {
  const auto d = desk(20, 4);
  TrainConfig c;
  c.q = 1.0;
  CHECK_THROWS_AS(Trainer(d.problem, d.partition, build_rcs(4, 4, 3, 1), c), ConfigError);
  c.q = 0.3;
  c.degrees = DegreeVector({2, 2});
  CHECK_THROWS_AS(Trainer(d.problem, d.partition, build_rcs(4, 4, 3, 1), c), ConfigError);
  c.degrees = DegreeVector({1});
  CHECK_THROWS_AS(Trainer(d.problem, d.partition, build_rcs(8, 4, 3, 1), c), ConfigError);
}
