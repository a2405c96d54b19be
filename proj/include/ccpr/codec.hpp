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
#include <string>
#include <string_view>
#include <vector>

namespace ccpr {

// Submatrix and worker indices are 0-based in code; CSV dumps and CLI output
// use 1-based submatrix labels (W1..WK).
using BlockId = std::size_t;
using WorkerId = std::size_t;

// M x workers grid. Row j is the block sequence (0, 1, ..., K-1) circularly
// shifted by row_shifts[j], so entry (j, i) = (i + row_shifts[j]) mod K.
// Column i is worker i's computation order, top to bottom.
class AssignmentMatrix {
 public:
  AssignmentMatrix(std::size_t block_count, std::size_t workers,
                   std::vector<std::size_t> row_shifts);

  std::size_t rows() const { return shifts_.size(); }
  std::size_t workers() const { return workers_; }
  std::size_t block_count() const { return blocks_; }
  const std::vector<std::size_t>& row_shifts() const { return shifts_; }

  BlockId at(std::size_t row, WorkerId worker) const {
    return (worker + shifts_[row]) % blocks_;
  }
  std::vector<BlockId> column(WorkerId worker) const;

  // M rows x workers columns of 1-based indices.
  void write_csv(std::ostream& out) const;

  friend bool operator==(const AssignmentMatrix&, const AssignmentMatrix&) = default;

 private:
  std::size_t blocks_;
  std::size_t workers_;
  std::vector<std::size_t> shifts_;
};

// Codeword degrees in computation order. Entries are positive; their sum
// may not exceed the assignment's row count (rows past the sum are held by
// the worker but not computed in that iteration).
class DegreeVector {
 public:
  explicit DegreeVector(std::vector<std::size_t> degrees);

  std::size_t size() const { return degrees_.size(); }
  std::size_t total() const { return total_; }
  std::size_t operator[](std::size_t l) const { return degrees_[l]; }
  const std::vector<std::size_t>& values() const { return degrees_; }

  // "1,2,3" or "[1,2,3]".
  static DegreeVector parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const DegreeVector&, const DegreeVector&) = default;

 private:
  std::vector<std::size_t> degrees_;
  std::size_t total_ = 0;
};

struct CodewordSpec {
  WorkerId worker = 0;
  std::size_t order = 0;  // 0-based computation position
  std::vector<BlockId> members;
};

struct OrderPolicy {
  enum class Kind { static_order, fixed_shift, adaptive };

  Kind kind = Kind::static_order;
  std::size_t age_threshold = 2;  // adaptive only
  std::size_t period = 0;         // fixed_shift only; 0 means the row count M

  static OrderPolicy static_order() { return {}; }
  static OrderPolicy fixed_shift(std::size_t period = 0) {
    return {Kind::fixed_shift, 2, period};
  }
  static OrderPolicy adaptive(std::size_t age_threshold) {
    return {Kind::adaptive, age_threshold, 0};
  }

  // "static", "rcs1" / "fixed_shift[:period]", "adaptive:<a_th>".
  static OrderPolicy parse(std::string_view text);
  // Display label used in CSV headers: RCS, RCS-1, RCS-adaptive(a_th=2).
  std::string label() const;

  friend bool operator==(const OrderPolicy&, const OrderPolicy&) = default;
};

// Random circularly shifted assignment: M distinct shifts drawn uniformly
// without replacement from {0..K-1}. Throws ConfigError when M > K or any
// count is zero.
AssignmentMatrix build_rcs(std::size_t block_count, std::size_t workers, std::size_t memory,
                           std::uint64_t seed);

// Rotates every column upward by `shift`: the entry at row r moves to row
// (r - shift) mod M. Requires shift < M.
AssignmentMatrix apply_order(const AssignmentMatrix& a, std::size_t shift);

// Static policies ignore the shift.
AssignmentMatrix apply_order(const AssignmentMatrix& a, const OrderPolicy& policy,
                             std::size_t shift);

// Shift used by the fixed-shift policy at 0-based iteration t.
std::size_t fixed_shift_at(const OrderPolicy& policy, std::size_t rows, std::size_t t);

struct ShiftChoice {
  std::size_t shift = 0;
  std::size_t aged_count = 0;
};

// Picks the shift that puts the most aged blocks (age > age_threshold) in
// computation position 1 across the responsive workers. Ties go to the
// smallest shift; an empty responsive set yields shift 0.
ShiftChoice select_adaptive_shift(const AssignmentMatrix& a, std::span<const std::size_t> ages,
                                  std::size_t age_threshold,
                                  std::span<const WorkerId> responsive);

// Splits each worker's column top-down into consecutive groups of sizes
// m(1..L). Output is ordered by worker, then computation order.
std::vector<CodewordSpec> encode(const AssignmentMatrix& a, const DegreeVector& m);

}  // namespace ccpr
