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
#include "ccpr/problem.hpp"

namespace ccpr {

// One message from a worker: the sum of its member block products.
struct CodedResult {
  CodewordSpec spec;
  Vector value;
  double completion_time = 0.0;
};

// ceil((1 - q) * K), the number of blocks after which an iteration stops.
// Requires 0 <= q < 1.
std::size_t recovery_target(std::size_t block_count, double q);

struct Recovery {
  std::vector<std::uint8_t> mask;  // r_t
  std::vector<Vector> values;      // W_k theta where mask[k] == 1, empty otherwise
  std::size_t count() const;
};

// Streaming peeling decoder for sum-structured codewords. Each ingested
// result becomes an equation over its unresolved members; degree-1
// equations resolve immediately and the recovery cascades through every
// pending equation that mentions the recovered block. Pending equations
// always keep at least two unresolved members.
class PeelingDecoder {
 public:
  PeelingDecoder(std::size_t block_count, std::size_t block_rows, std::size_t target);

  // Returns the blocks recovered by this result, in resolution order.
  // Throws ProtocolError for a member outside [0, K) or a value of the
  // wrong length.
  std::vector<BlockId> ingest(const CodedResult& result);
  std::vector<BlockId> ingest(std::span<const BlockId> members, const Vector& value);

  bool complete() const { return recovered_count_ >= target_; }
  std::size_t target() const { return target_; }
  std::size_t block_count() const { return recovered_.size(); }
  std::size_t recovered_count() const { return recovered_count_; }
  std::size_t pending_count() const;
  std::size_t ingested_count() const { return ingested_; }
  bool is_recovered(BlockId k) const { return recovered_.at(k) != 0; }
  const std::vector<std::uint8_t>& mask() const { return recovered_; }
  const std::vector<BlockId>& resolution_order() const { return order_; }

  Recovery finalize() const;

  // Line-oriented dump of every ingested equation and what it resolved.
  void write_trace(std::ostream& out) const;

 private:
  struct Equation {
    std::vector<BlockId> unresolved;
    Vector residual;
    bool live = true;
  };
  struct TraceLine {
    CodewordSpec spec;
    double time = 0.0;
    std::vector<BlockId> resolved;
  };

  std::vector<BlockId> absorb(std::span<const BlockId> members, const Vector& value);
  void recover(BlockId k, Vector value, std::vector<BlockId>& ripple);

  std::size_t block_rows_;
  std::size_t target_;
  std::size_t recovered_count_ = 0;
  std::size_t ingested_ = 0;
  std::vector<std::uint8_t> recovered_;
  std::vector<Vector> values_;
  std::vector<Equation> equations_;
  std::vector<std::vector<std::size_t>> touching_;  // block -> equation ids
  std::vector<BlockId> order_;
  std::vector<TraceLine> trace_;
};

bool is_complete(const PeelingDecoder& state, double q);

}  // namespace ccpr
