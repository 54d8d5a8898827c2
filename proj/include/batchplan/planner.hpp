// Copyright (c) 2026, the batchplan authors. All rights reserved.
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

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "batchplan/manifest.hpp"
#include "batchplan/plan.hpp"

namespace batchplan {

// random: per epoch, shuffle the segments, pack contiguously, then shuffle
//         the batch order.
// sorted: sort segments once by (length, id, offset) before epoch 0 and pack
//         once; per epoch only the batch order is shuffled, so batch
//         compositions are identical across epochs.
// bucket: assign segments to length buckets once before epoch 0; per epoch,
//         shuffle within each bucket, pack each bucket contiguously, pool
//         all batches, then shuffle the batch order.
enum class Strategy { random, sorted, bucket };

enum class BucketLimitMode { uniform, quantile };

Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy strategy);
BucketLimitMode parse_bucket_limit_mode(std::string_view name);
std::string_view to_string(BucketLimitMode mode);

// Fixed: a batch is `value` sequences. Dynamic: a batch is capped at `value`
// total samples after padding (count * padded_length <= value).
struct BatchSizeMode {
  enum class Kind { fixed, dynamic };

  Kind kind = Kind::fixed;
  std::int64_t value = 1;

  static BatchSizeMode fixed(std::int64_t count) {
    return {Kind::fixed, count};
  }
  static BatchSizeMode dynamic(std::int64_t budget_samples) {
    return {Kind::dynamic, budget_samples};
  }

  friend bool operator==(const BatchSizeMode&, const BatchSizeMode&) = default;
};

struct BatchingConfig {
  Strategy strategy = Strategy::random;
  BatchSizeMode size = BatchSizeMode::fixed(1);
  std::int64_t num_buckets = 10;  // bucket strategy only
  BucketLimitMode bucket_limits = BucketLimitMode::uniform;
  std::uint64_t seed = 0;
  std::int64_t epochs = 1;
};

// Exact rational boundary value numer/denom, compared against integer
// lengths without rounding.
struct BucketBoundary {
  std::int64_t numer = 0;
  std::int64_t denom = 1;

  // Boundary values belong to the bucket above them (half-open intervals).
  bool at_or_below(std::int64_t length) const { return numer <= length * denom; }

  friend bool operator==(const BucketBoundary&, const BucketBoundary&) = default;
};

// uniform:  b_j = min + j * (max - min) / num_buckets for j = 1..B-1, kept
//           as exact rationals.
// quantile: b_j is the first length of the j-th equal-count chunk of the
//           sorted length list, so each bucket holds the same number of
//           lengths up to ties (duplicate lengths always share a bucket).
//           Requires num_buckets <= lengths.size() (throws ConfigError).
std::vector<BucketBoundary> compute_bucket_limits(
    std::span<const std::int64_t> lengths, std::int64_t num_buckets,
    BucketLimitMode mode);

// Half-open intervals [min, b_1), [b_1, b_2), ..., [b_{B-1}, max]: returns
// the smallest bucket index whose interval contains the length. With no
// boundaries everything lands in bucket 0.
std::size_t assign_bucket(std::int64_t length,
                          std::span<const BucketBoundary> boundaries);

// Plans config.epochs epochs. When the size mode is dynamic and the budget
// is smaller than the longest sequence, sequences are split first (see
// split_sequences). Deterministic given (manifest order, config); every plan
// covers each dataset sample exactly once.
//
// Bucket strategy with num_buckets == 1 delegates to the random planner on
// the same RNG streams, so the two produce byte-identical plans.
std::vector<EpochPlan> plan_epochs(const Manifest& m,
                                   const BatchingConfig& config);

}  // namespace batchplan
