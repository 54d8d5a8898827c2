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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "batchplan/errors.hpp"
#include "batchplan/plan_io.hpp"
#include "batchplan/planner.hpp"
#include "batchplan/rng.hpp"

using namespace batchplan;

namespace {

Manifest manifest_of(const std::vector<std::int64_t>& lengths) {
  Manifest m;
  for (std::size_t i = 0; i < lengths.size(); ++i)
    m.records.push_back({"s" + std::to_string(i), lengths[i]});
  return m;
}

// (id, offset) -> length over a full plan; asserts no duplicates.
std::map<std::pair<std::string, std::int64_t>, std::int64_t> coverage_map(
    const EpochPlan& plan) {
  std::map<std::pair<std::string, std::int64_t>, std::int64_t> seen;
  for (const auto& batch : plan.batches)
    for (const auto& segment : batch.segments) {
      const auto [it, inserted] =
          seen.insert({{segment.sequence_id, segment.offset}, segment.length});
      REQUIRE(inserted);
      (void)it;
    }
  return seen;
}

// Every sample of every record appears exactly once.
void check_coverage(const Manifest& m, const EpochPlan& plan) {
  auto seen = coverage_map(plan);
  for (const auto& record : m.records) {
    std::int64_t offset = 0;
    while (offset < record.length) {
      const auto it = seen.find({record.id, offset});
      REQUIRE(it != seen.end());
      offset += it->second;
      seen.erase(it);
    }
    CHECK(offset == record.length);
  }
  CHECK(seen.empty());
}

std::multiset<std::multiset<std::int64_t>> composition_set(const EpochPlan& plan) {
  std::multiset<std::multiset<std::int64_t>> set;
  for (const auto& batch : plan.batches) {
    std::multiset<std::int64_t> lengths;
    for (const auto& segment : batch.segments) lengths.insert(segment.length);
    set.insert(std::move(lengths));
  }
  return set;
}

}  // namespace

TEST_CASE("strategy and mode names parse and print") {
  CHECK(parse_strategy("random") == Strategy::random);
  CHECK(parse_strategy("sorted") == Strategy::sorted);
  CHECK(parse_strategy("bucket") == Strategy::bucket);
  CHECK_THROWS_AS(parse_strategy("shuffled"), ConfigError);
  CHECK(to_string(Strategy::bucket) == "bucket");
  CHECK(parse_bucket_limit_mode("uniform") == BucketLimitMode::uniform);
  CHECK(parse_bucket_limit_mode("quantile") == BucketLimitMode::quantile);
  CHECK_THROWS_AS(parse_bucket_limit_mode("log"), ConfigError);
}

TEST_CASE("uniform limits are exact rationals") {
  const std::vector<std::int64_t> lengths{2, 5, 12};
  const auto boundaries =
      compute_bucket_limits(lengths, 2, BucketLimitMode::uniform);
  REQUIRE(boundaries.size() == 1);
  // min + (max - min) / 2 = 7, held as 14/2.
  CHECK(boundaries[0] == BucketBoundary{14, 2});

  // Non-integer boundaries stay exact: [1, 10] in 4 buckets.
  const std::vector<std::int64_t> wide{1, 10};
  const auto quarters =
      compute_bucket_limits(wide, 4, BucketLimitMode::uniform);
  REQUIRE(quarters.size() == 3);
  CHECK(quarters[0] == BucketBoundary{13, 4});   // 3.25
  CHECK(quarters[1] == BucketBoundary{22, 4});   // 5.5
  CHECK(quarters[2] == BucketBoundary{31, 4});   // 7.75
  CHECK(assign_bucket(3, quarters) == 0);
  CHECK(assign_bucket(4, quarters) == 1);
  CHECK(assign_bucket(5, quarters) == 1);
  CHECK(assign_bucket(6, quarters) == 2);
  CHECK(assign_bucket(8, quarters) == 3);
}

TEST_CASE("quantile limits split sorted lengths into equal-count chunks") {
  const std::vector<std::int64_t> lengths{4, 1, 6, 2, 5, 3};
  const auto boundaries =
      compute_bucket_limits(lengths, 3, BucketLimitMode::quantile);
  REQUIRE(boundaries.size() == 2);
  CHECK(boundaries[0] == BucketBoundary{3, 1});
  CHECK(boundaries[1] == BucketBoundary{5, 1});
  // Buckets come out as {1,2}, {3,4}, {5,6}.
  CHECK(assign_bucket(1, boundaries) == 0);
  CHECK(assign_bucket(2, boundaries) == 0);
  CHECK(assign_bucket(3, boundaries) == 1);
  CHECK(assign_bucket(4, boundaries) == 1);
  CHECK(assign_bucket(5, boundaries) == 2);
  CHECK(assign_bucket(6, boundaries) == 2);
}

TEST_CASE("quantile mode requires enough lengths") {
  const std::vector<std::int64_t> lengths{1, 2};
  CHECK_THROWS_AS(compute_bucket_limits(lengths, 3, BucketLimitMode::quantile),
                  ConfigError);
}

TEST_CASE("boundary values belong to the upper bucket") {
  const std::vector<BucketBoundary> boundaries{{7, 1}};
  CHECK(assign_bucket(7, boundaries) == 1);
  CHECK(assign_bucket(6, boundaries) == 0);
  CHECK(assign_bucket(8, boundaries) == 1);
}

TEST_CASE("no boundaries puts everything in bucket 0") {
  CHECK(assign_bucket(42, {}) == 0);
}

TEST_CASE("one bucket means no boundaries") {
  const std::vector<std::int64_t> lengths{3, 9, 27};
  CHECK(compute_bucket_limits(lengths, 1, BucketLimitMode::uniform).empty());
  CHECK(compute_bucket_limits(lengths, 1, BucketLimitMode::quantile).empty());
}

TEST_CASE("quantile duplicates share a bucket") {
  // All-equal lengths: every boundary equals the single value, which lands
  // in the topmost bucket; the others are empty but assignment stays total.
  const std::vector<std::int64_t> lengths{5, 5, 5, 5};
  const auto boundaries =
      compute_bucket_limits(lengths, 2, BucketLimitMode::quantile);
  REQUIRE(boundaries.size() == 1);
  CHECK(assign_bucket(5, boundaries) == 1);
}

TEST_CASE("plan_epochs validates config and data") {
  const auto m = manifest_of({3, 1, 2});
  BatchingConfig config;
  config.epochs = 0;
  CHECK_THROWS_AS(plan_epochs(m, config), ConfigError);
  config.epochs = 1;
  config.size = BatchSizeMode::fixed(0);
  CHECK_THROWS_AS(plan_epochs(m, config), ConfigError);
  config.size = BatchSizeMode::fixed(2);
  config.strategy = Strategy::bucket;
  config.num_buckets = 4;  // more buckets than segments
  CHECK_THROWS_AS(plan_epochs(m, config), ConfigError);
  CHECK_THROWS_AS(plan_epochs(Manifest{}, BatchingConfig{}), DataError);
}

TEST_CASE("sorted plans are length-sorted and stable across epochs") {
  const auto m = manifest_of({5, 3, 4, 2});
  BatchingConfig config;
  config.strategy = Strategy::sorted;
  config.size = BatchSizeMode::fixed(2);
  config.epochs = 4;
  config.seed = 5;
  const auto plans = plan_epochs(m, config);
  REQUIRE(plans.size() == 4);

  const auto compositions = composition_set(plans[0]);
  const std::multiset<std::multiset<std::int64_t>> expected{{2, 3}, {4, 5}};
  CHECK(compositions == expected);
  for (const auto& plan : plans) {
    CHECK(composition_set(plan) == compositions);
    check_coverage(m, plan);
    for (const auto& batch : plan.batches) {
      // Within a batch the sorted stream keeps lengths non-decreasing.
      for (std::size_t i = 1; i < batch.segments.size(); ++i)
        CHECK(batch.segments[i - 1].length <= batch.segments[i].length);
    }
  }
}

TEST_CASE("sorted ties break by id then offset") {
  Manifest m;
  m.records = {{"b", 4}, {"a", 4}, {"c", 4}};
  BatchingConfig config;
  config.strategy = Strategy::sorted;
  config.size = BatchSizeMode::fixed(3);
  config.seed = 1;
  const auto plans = plan_epochs(m, config);
  const auto& segments = plans[0].batches[0].segments;
  REQUIRE(segments.size() == 3);
  CHECK(segments[0].sequence_id == "a");
  CHECK(segments[1].sequence_id == "b");
  CHECK(segments[2].sequence_id == "c");
}

TEST_CASE("random plans differ across epochs and preserve coverage") {
  std::vector<std::int64_t> lengths;
  auto rng = derive_stream(77, "planner-prop", 0);
  for (int i = 0; i < 64; ++i)
    lengths.push_back(1 + static_cast<std::int64_t>(rng.below(500)));
  const auto m = manifest_of(lengths);

  BatchingConfig config;
  config.strategy = Strategy::random;
  config.size = BatchSizeMode::fixed(8);
  config.epochs = 3;
  for (const std::uint64_t seed : {11ull, 22ull, 33ull, 44ull, 55ull}) {
    config.seed = seed;
    const auto plans = plan_epochs(m, config);
    REQUIRE(plans.size() == 3);
    for (const auto& plan : plans) check_coverage(m, plan);
    // Shuffles virtually never repeat with 64 segments.
    CHECK(dump_plans_string({&plans[0], 1}) != dump_plans_string({&plans[1], 1}));
    CHECK(plans[0].epoch_index == 0);
    CHECK(plans[1].epoch_index == 1);
  }
}

TEST_CASE("coverage holds across every strategy and size mode") {
  std::vector<std::int64_t> lengths;
  auto rng = derive_stream(78, "planner-cover", 0);
  for (int i = 0; i < 40; ++i)
    lengths.push_back(1 + static_cast<std::int64_t>(rng.below(300)));
  const auto m = manifest_of(lengths);

  for (const auto strategy :
       {Strategy::random, Strategy::sorted, Strategy::bucket}) {
    for (const auto mode :
         {BucketLimitMode::uniform, BucketLimitMode::quantile}) {
      for (const auto size :
           {BatchSizeMode::fixed(4), BatchSizeMode::dynamic(700),
            BatchSizeMode::dynamic(97)}) {  // 97 < max length forces splits
        BatchingConfig config;
        config.strategy = strategy;
        config.size = size;
        config.num_buckets = 5;
        config.bucket_limits = mode;
        config.seed = 3;
        config.epochs = 2;
        for (const auto& plan : plan_epochs(m, config))
          check_coverage(m, plan);
      }
    }
  }
}

TEST_CASE("dynamic planning splits only when the budget requires it") {
  const auto m = manifest_of({10, 25, 7});
  BatchingConfig config;
  config.strategy = Strategy::random;
  config.size = BatchSizeMode::dynamic(25);
  config.seed = 0;
  // Budget == max length: no splitting.
  const auto whole = plan_epochs(m, config);
  for (const auto& batch : whole[0].batches)
    for (const auto& segment : batch.segments) CHECK(segment.offset == 0);

  config.size = BatchSizeMode::dynamic(24);
  bool saw_offset = false;
  const auto split = plan_epochs(m, config);
  for (const auto& batch : split[0].batches)
    for (const auto& segment : batch.segments)
      saw_offset = saw_offset || segment.offset > 0;
  CHECK(saw_offset);
}

TEST_CASE("bucket plans keep batches within one bucket") {
  std::vector<std::int64_t> lengths;
  auto rng = derive_stream(79, "planner-purity", 0);
  for (int i = 0; i < 50; ++i)
    lengths.push_back(1 + static_cast<std::int64_t>(rng.below(1000)));
  const auto m = manifest_of(lengths);

  BatchingConfig config;
  config.strategy = Strategy::bucket;
  config.size = BatchSizeMode::fixed(4);
  config.num_buckets = 6;
  config.seed = 9;
  const auto boundaries = compute_bucket_limits(lengths, config.num_buckets,
                                                config.bucket_limits);
  for (const auto& plan : plan_epochs(m, config)) {
    check_coverage(m, plan);
    for (const auto& batch : plan.batches) {
      const auto bucket = assign_bucket(batch.segments[0].length, boundaries);
      for (const auto& segment : batch.segments)
        CHECK(assign_bucket(segment.length, boundaries) == bucket);
    }
  }
}

TEST_CASE("a single bucket replans exactly like random") {
  std::vector<std::int64_t> lengths;
  auto rng = derive_stream(80, "planner-onebucket", 0);
  for (int i = 0; i < 30; ++i)
    lengths.push_back(1 + static_cast<std::int64_t>(rng.below(200)));
  const auto m = manifest_of(lengths);

  BatchingConfig bucket_config;
  bucket_config.strategy = Strategy::bucket;
  bucket_config.num_buckets = 1;
  bucket_config.size = BatchSizeMode::fixed(4);
  bucket_config.seed = 31;
  bucket_config.epochs = 3;
  auto random_config = bucket_config;
  random_config.strategy = Strategy::random;

  const auto a = plan_epochs(m, bucket_config);
  const auto b = plan_epochs(m, random_config);
  CHECK(dump_plans_string(a) == dump_plans_string(b));
}

TEST_CASE("quantile buckets of size K compose like sorted batches") {
  // Distinct lengths, n = 12, K = 3, buckets = n / K.
  const std::vector<std::int64_t> lengths{19, 3, 41, 7, 23, 2,
                                          31, 11, 37, 5, 29, 13};
  const auto m = manifest_of(lengths);

  BatchingConfig bucket_config;
  bucket_config.strategy = Strategy::bucket;
  bucket_config.size = BatchSizeMode::fixed(3);
  bucket_config.num_buckets = 4;
  bucket_config.bucket_limits = BucketLimitMode::quantile;
  bucket_config.seed = 12;
  auto sorted_config = bucket_config;
  sorted_config.strategy = Strategy::sorted;

  const auto bucketed = plan_epochs(m, bucket_config);
  const auto sorted = plan_epochs(m, sorted_config);
  CHECK(composition_set(bucketed[0]) == composition_set(sorted[0]));
}

TEST_CASE("plans are deterministic for a fixed config") {
  const auto m = manifest_of({9, 2, 14, 5, 11, 3, 8});
  BatchingConfig config;
  config.strategy = Strategy::bucket;
  config.num_buckets = 3;
  config.size = BatchSizeMode::dynamic(20);
  config.seed = 1234;
  config.epochs = 2;
  const auto a = plan_epochs(m, config);
  const auto b = plan_epochs(m, config);
  CHECK(a == b);
  CHECK(dump_plans_string(a) == dump_plans_string(b));
}
