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

#include "ccpr/age_metrics.hpp"

#include <iomanip>
#include <limits>
#include <stdexcept>

#include "ccpr/error.hpp"

namespace ccpr {

AgeTable::AgeTable(std::size_t block_count, std::size_t initial_age)
    : current_(block_count, initial_age) {
  if (block_count == 0) throw ConfigError("age table needs at least one block");
}

AgeTable AgeTable::from_history(std::vector<std::vector<std::size_t>> rows) {
  if (rows.empty() || rows.front().empty()) throw DimensionError("empty age history");
  AgeTable table(rows.front().size());
  for (const auto& row : rows)
    if (row.size() != table.block_count()) throw DimensionError("ragged age history");
  table.current_ = rows.back();
  table.history_ = std::move(rows);
  return table;
}

void AgeTable::update(std::span<const std::uint8_t> recovered) {
  if (recovered.size() != current_.size())
    throw DimensionError("recovery vector has length " + std::to_string(recovered.size()) +
                         ", expected " + std::to_string(current_.size()));
  history_.push_back(current_);
  for (std::size_t k = 0; k < current_.size(); ++k)
    current_[k] = recovered[k] ? 1 : current_[k] + 1;
}

double AgeTable::average_age(BlockId k) const {
  if (history_.empty()) throw std::logic_error("average_age needs at least one iteration");
  if (k >= block_count()) throw DimensionError("block index out of range");
  double sum = 0.0;
  for (const auto& row : history_) sum += static_cast<double>(row[k]);
  return sum / static_cast<double>(history_.size());
}

std::vector<double> AgeTable::average_ages() const {
  std::vector<double> out(block_count());
  for (BlockId k = 0; k < out.size(); ++k) out[k] = average_age(k);
  return out;
}

double AgeTable::objective(std::size_t age_threshold) const {
  if (history_.empty()) throw std::logic_error("objective needs at least one iteration");
  std::size_t aged = 0;
  for (const auto& row : history_)
    for (std::size_t a : row) aged += a > age_threshold ? 1 : 0;
  return static_cast<double>(aged) /
         (static_cast<double>(history_.size()) * static_cast<double>(block_count()));
}

void AgeTable::write_ages_csv(std::ostream& out) const {
  for (std::size_t k = 0; k < block_count(); ++k) out << (k ? "," : "") << 'a' << k + 1;
  out << '\n';
  for (const auto& row : history_) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
    out << '\n';
  }
}

void AgeTable::write_summary_csv(std::ostream& out, std::size_t age_threshold) const {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "block,average_age\n";
  for (BlockId k = 0; k < block_count(); ++k) out << k + 1 << ',' << average_age(k) << '\n';
  out << "a_th," << age_threshold << '\n';
  out << "objective," << objective(age_threshold) << '\n';
  out.precision(old);
}

}  // namespace ccpr
