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

#include "batchplan/planner.hpp"

#include <algorithm>
#include <tuple>

#include "batchplan/errors.hpp"
#include "batchplan/packer.hpp"
#include "batchplan/rng.hpp"

namespace batchplan {

namespace {

// RNG purpose tags. "segments" orders the epoch's segment stream (random
// strategy), "bucket" shuffles within one bucket (indexed by bucket id),
// "batches" shuffles the final batch order for every strategy.
constexpr std::string_view kSegmentsTag = "segments";
constexpr std::string_view kBucketTag = "bucket";
constexpr std::string_view kBatchesTag = "batches";

std::vector<Batch> pack_segments(std::span<const Segment> segments,
                                 const BatchSizeMode& size) {
  if (size.kind == BatchSizeMode::Kind::fixed)
    return pack_fixed(segments, size.value);
  return pack_dynamic(segments, size.value);
}

std::vector<EpochPlan> plan_random(const std::vector<Segment>& base,
                                   const BatchingConfig& config) {
  std::vector<EpochPlan> plans;
  plans.reserve(static_cast<std::size_t>(config.epochs));
  for (std::int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<Segment> segments = base;
    auto segment_rng = derive_stream(config.seed, kSegmentsTag,
                                     static_cast<std::uint64_t>(epoch));
    shuffle(segments, segment_rng);
    std::vector<Batch> batches = pack_segments(segments, config.size);
    auto batch_rng = derive_stream(config.seed, kBatchesTag,
                                   static_cast<std::uint64_t>(epoch));
    shuffle(batches, batch_rng);
    plans.push_back({std::move(batches), static_cast<int>(epoch)});
  }
  return plans;
}

std::vector<EpochPlan> plan_sorted(const std::vector<Segment>& base,
                                   const BatchingConfig& config) {
  std::vector<Segment> sorted_segments = base;
  // Tie-break by id then offset so plans stay deterministic with duplicate
  // lengths and with split siblings of one sequence.
  std::sort(sorted_segments.begin(), sorted_segments.end(),
            [](const Segment& a, const Segment& b) {
              return std::tie(a.length, a.sequence_id, a.offset) <
                     std::tie(b.length, b.sequence_id, b.offset);
            });
  const std::vector<Batch> base_batches =
      pack_segments(sorted_segments, config.size);

  std::vector<EpochPlan> plans;
  plans.reserve(static_cast<std::size_t>(config.epochs));
  for (std::int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<Batch> batches = base_batches;
    auto batch_rng = derive_stream(config.seed, kBatchesTag,
                                   static_cast<std::uint64_t>(epoch));
    shuffle(batches, batch_rng);
    plans.push_back({std::move(batches), static_cast<int>(epoch)});
  }
  return plans;
}

std::vector<EpochPlan> plan_bucket(const std::vector<Segment>& base,
                                   const BatchingConfig& config) {
  std::vector<std::int64_t> lengths;
  lengths.reserve(base.size());
  for (const auto& segment : base) lengths.push_back(segment.length);
  const std::vector<BucketBoundary> boundaries =
      compute_bucket_limits(lengths, config.num_buckets, config.bucket_limits);

  std::vector<std::vector<Segment>> buckets(
      static_cast<std::size_t>(config.num_buckets));
  for (const auto& segment : base)
    buckets[assign_bucket(segment.length, boundaries)].push_back(segment);

  std::vector<EpochPlan> plans;
  plans.reserve(static_cast<std::size_t>(config.epochs));
  for (std::int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<Batch> pooled;
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      if (buckets[b].empty()) continue;
      std::vector<Segment> group = buckets[b];
      auto bucket_rng = derive_stream(config.seed, kBucketTag,
                                      static_cast<std::uint64_t>(epoch), b);
      shuffle(group, bucket_rng);
      for (auto& batch : pack_segments(group, config.size))
        pooled.push_back(std::move(batch));
    }
    auto batch_rng = derive_stream(config.seed, kBatchesTag,
                                   static_cast<std::uint64_t>(epoch));
    shuffle(pooled, batch_rng);
    plans.push_back({std::move(pooled), static_cast<int>(epoch)});
  }
  return plans;
}

}  // namespace

Strategy parse_strategy(std::string_view name) {
  if (name == "random") return Strategy::random;
  if (name == "sorted") return Strategy::sorted;
  if (name == "bucket") return Strategy::bucket;
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::random: return "random";
    case Strategy::sorted: return "sorted";
    case Strategy::bucket: return "bucket";
  }
  throw InvariantError("unreachable strategy value");
}

BucketLimitMode parse_bucket_limit_mode(std::string_view name) {
  if (name == "uniform") return BucketLimitMode::uniform;
  if (name == "quantile") return BucketLimitMode::quantile;
  throw ConfigError("unknown bucket limit mode '" + std::string(name) + "'");
}

std::string_view to_string(BucketLimitMode mode) {
  return mode == BucketLimitMode::uniform ? "uniform" : "quantile";
}

std::vector<BucketBoundary> compute_bucket_limits(
    std::span<const std::int64_t> lengths, std::int64_t num_buckets,
    BucketLimitMode mode) {
  if (lengths.empty()) throw ConfigError("bucket limits need at least one length");
  if (num_buckets < 1) throw ConfigError("num_buckets must be >= 1");

  std::vector<BucketBoundary> boundaries;
  boundaries.reserve(static_cast<std::size_t>(num_buckets) - 1);
  if (num_buckets == 1) return boundaries;

  if (mode == BucketLimitMode::uniform) {
    const auto [min_it, max_it] =
        std::minmax_element(lengths.begin(), lengths.end());
    const std::int64_t min_len = *min_it;
    const std::int64_t span = *max_it - min_len;
    for (std::int64_t j = 1; j < num_buckets; ++j)
      boundaries.push_back({num_buckets * min_len + j * span, num_buckets});
    return boundaries;
  }

  const auto n = static_cast<std::int64_t>(lengths.size());
  if (num_buckets > n)
    throw ConfigError("quantile mode needs num_buckets <= number of lengths");
  std::vector<std::int64_t> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  // Boundary j is the first length of the j-th equal-count chunk of the
  // sorted list, so buckets hold the same number of lengths up to ties.
  for (std::int64_t j = 1; j < num_buckets; ++j) {
    const std::int64_t index = (j * n + num_buckets - 1) / num_buckets;
    boundaries.push_back({sorted[static_cast<std::size_t>(index)], 1});
  }
  return boundaries;
}

std::size_t assign_bucket(std::int64_t length,
                          std::span<const BucketBoundary> boundaries) {
  const auto first_above = std::partition_point(
      boundaries.begin(), boundaries.end(),
      [length](const BucketBoundary& b) { return b.at_or_below(length); });
  return static_cast<std::size_t>(first_above - boundaries.begin());
}

std::vector<EpochPlan> plan_epochs(const Manifest& m,
                                   const BatchingConfig& config) {
  if (m.records.empty()) throw DataError("manifest is empty");
  if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (config.size.value < 1)
    throw ConfigError(config.size.kind == BatchSizeMode::Kind::fixed
                          ? "fixed batch size must be >= 1"
                          : "dynamic budget must be >= 1");

  std::int64_t max_len = 0;
  for (const auto& record : m.records)
    max_len = std::max(max_len, record.length);

  const bool split = config.size.kind == BatchSizeMode::Kind::dynamic &&
                     config.size.value < max_len;
  const std::vector<Segment> base =
      split ? split_sequences(m, config.size.value) : whole_segments(m);

  switch (config.strategy) {
    case Strategy::random:
      return plan_random(base, config);
    case Strategy::sorted:
      return plan_sorted(base, config);
    case Strategy::bucket:
      if (config.num_buckets < 1)
        throw ConfigError("num_buckets must be >= 1");
      if (config.num_buckets > static_cast<std::int64_t>(base.size()))
        throw ConfigError("num_buckets must not exceed the segment count");
      // A single bucket is the same as random batching; delegating makes the
      // equivalence hold byte-for-byte.
      if (config.num_buckets == 1) return plan_random(base, config);
      return plan_bucket(base, config);
  }
  throw InvariantError("unreachable strategy value");
}

}  // namespace batchplan
