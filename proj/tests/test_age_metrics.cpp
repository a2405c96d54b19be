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

#include <sstream>

#include "ccpr/age_metrics.hpp"
#include "ccpr/error.hpp"
#include "ccpr/random.hpp"
#include "doctest.h"

using namespace ccpr;

namespace {

std::vector<std::uint8_t> mask(std::size_t K, std::initializer_list<std::size_t> ones) {
  std::vector<std::uint8_t> m(K, 0);
  for (auto k : ones) m[k] = 1;
  return m;
}

}  // namespace

TEST_CASE("recovered every iteration stays at age 1") {
  AgeTable a(4);
  for (int t = 0; t < 10; ++t) a.update(std::vector<std::uint8_t>(4, 1));
  for (const auto& row : a.history())
    for (auto v : row) CHECK(v == 1);
  for (double v : a.average_ages()) CHECK(v == 1.0);
  CHECK(a.objective(1) == 0.0);
}

TEST_CASE("age grows by one per missed iteration and resets on recovery") {
  AgeTable a(3);
  for (int t = 0; t < 3; ++t) a.update(mask(3, {1, 2}));
  CHECK(a.current() == std::vector<std::size_t>{4, 1, 1});
  a.update(mask(3, {0}));
  CHECK(a.current() == std::vector<std::size_t>{1, 2, 2});
  std::vector<std::size_t> col0;
  for (const auto& row : a.history()) col0.push_back(row[0]);
  CHECK(col0 == std::vector<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("never recovered") {
  AgeTable a(2);
  for (int t = 0; t < 9; ++t) a.update(mask(2, {1}));
  CHECK(a.current()[0] == 10);
  CHECK(a.average_age(0) == doctest::Approx(5.0));  // (T + 1) / 2 with T = 9

  AgeTable b(1);
  for (int t = 0; t < 400; ++t) b.update(mask(1, {}));
  CHECK(b.average_age(0) == doctest::Approx(200.5));
}

TEST_CASE("alternating recovery averages 1.5") {
  AgeTable a(1);
  for (int t = 0; t < 100; ++t) a.update(t % 2 ? mask(1, {0}) : mask(1, {}));
  CHECK(a.average_age(0) == doctest::Approx(1.5));
}

TEST_CASE("objective examples") {
  CHECK(AgeTable::from_history({{1, 2}, {1, 2}}).objective(1) == doctest::Approx(0.5));
  CHECK(AgeTable::from_history({{1, 1}, {1, 1}}).objective(1) == 0.0);
  CHECK(AgeTable::from_history({{3, 3}, {1, 1}}).objective(2) == doctest::Approx(0.5));
  CHECK_THROWS_AS(AgeTable(2).average_age(0), std::logic_error);
}

TEST_CASE("objective is non-increasing in the threshold and ages follow recoveries") {
  Rng rng(4);
  AgeTable a(10);
  std::vector<std::size_t> last_seen(10, 0);
  for (std::size_t t = 1; t <= 200; ++t) {
    std::vector<std::uint8_t> r(10);
    for (auto& v : r) v = rng() % 3 == 0;
    a.update(r);
    for (std::size_t k = 0; k < 10; ++k) {
      CHECK(a.history().back()[k] <= t);
      if (r[k]) last_seen[k] = t;
      CHECK(a.current()[k] == t + 1 - last_seen[k]);
      CHECK((a.current()[k] == 1) == (r[k] == 1));
    }
  }
  for (std::size_t th = 1; th < 30; ++th) CHECK(a.objective(th + 1) <= a.objective(th));
  CHECK(a.objective(200) == 0.0);
}

TEST_CASE("update rejects a mask of the wrong length") {
  AgeTable a(3);
  CHECK_THROWS_AS(a.update(std::vector<std::uint8_t>(2, 1)), DimensionError);
}

TEST_CASE("csv writers") {
  AgeTable a(2);
  a.update(mask(2, {0}));
  a.update(mask(2, {}));
  std::ostringstream ages, summary;
  a.write_ages_csv(ages);
  CHECK(ages.str() == "a1,a2\n1,1\n1,2\n");
  a.write_summary_csv(summary, 2);
  CHECK(summary.str() == "block,average_age\n1,1\n2,1.5\na_th,2\nobjective,0\n");
}
