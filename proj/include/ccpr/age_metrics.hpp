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
#include <ostream>
#include <span>
#include <vector>

#include "ccpr/codec.hpp"

namespace ccpr {

// Iteration-indexed age of every partial computation W_k theta.
//
// current()[k] is a_{k,t} for the upcoming iteration t. update() appends
// current() to the history and then applies
//   a_{k,t+1} = 1 if r_t(k) = 1, a_{k,t} + 1 otherwise,
// so after T updates the history holds a_{k,1..T}. Ages start at 1, as if
// every block had been recovered just before the first iteration.
class AgeTable {
 public:
  explicit AgeTable(std::size_t block_count, std::size_t initial_age = 1);

  // Wraps a recorded T x K history for offline evaluation; current() is
  // left at the last row.
  static AgeTable from_history(std::vector<std::vector<std::size_t>> rows);

  void update(std::span<const std::uint8_t> recovered);

  std::size_t block_count() const { return current_.size(); }
  std::size_t iterations() const { return history_.size(); }
  const std::vector<std::size_t>& current() const { return current_; }
  const std::vector<std::vector<std::size_t>>& history() const { return history_; }

  // (1/T) sum_t a_{k,t}
  double average_age(BlockId k) const;
  std::vector<double> average_ages() const;

  // (1/T) sum_t (1/K) sum_k 1{a_{k,t} > age_threshold}
  double objective(std::size_t age_threshold) const;

  // T rows x K columns of a_{k,t}, with a header row a1..aK.
  void write_ages_csv(std::ostream& out) const;
  // block,average_age rows followed by a_th and objective rows.
  void write_summary_csv(std::ostream& out, std::size_t age_threshold) const;

 private:
  std::vector<std::size_t> current_;
  std::vector<std::vector<std::size_t>> history_;
};

}  // namespace ccpr
