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
#include <vector>

#include "batchplan/plan.hpp"

namespace batchplan {

// Zeros padded onto the batch: sum over segments of
// (padded_length - segment.length).
std::int64_t padding_of_batch(const Batch& batch);

// count * padded_length; the memory proxy. Under a dynamic budget this never
// exceeds the budget.
std::int64_t batch_footprint(const Batch& batch);

// Zero-padding ratio of a whole epoch: total padding relative to the
// original (pre-split) dataset length. Splitting conserves total length, so
// the denominator is unambiguous. Throws InvariantError when the plan's
// segment lengths do not sum to original_total.
double zpr(const EpochPlan& plan, std::int64_t original_total);

struct EpochStats {
  double zpr = 0.0;
  std::int64_t total_padding = 0;
  // Sum of batch footprints == original_total + total_padding; the
  // walltime proxy.
  std::int64_t padded_volume = 0;
  std::int64_t batch_count = 0;
  std::int64_t peak_footprint = 0;
  double footprint_mean = 0.0;
  double footprint_std = 0.0;  // population std over the epoch's batches
};

EpochStats compute_epoch_stats(const EpochPlan& plan,
                               std::int64_t original_total);

struct MetricSummary {
  double mean = 0.0;
  double sem = 0.0;  // standard error of the mean (sample std / sqrt(n))
};

struct StatsSummary {
  MetricSummary zpr;
  MetricSummary total_padding;
  MetricSummary padded_volume;
  MetricSummary batch_count;
  MetricSummary peak_footprint;
  MetricSummary footprint_mean;
  MetricSummary footprint_std;
};

// All epochs of one batching seed.
struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<EpochStats> epochs;
};

struct Report {
  std::vector<SeedRun> runs;
  // Across-epoch summaries, aligned with runs.
  std::vector<StatsSummary> per_seed;
  // Mean and standard error across the per-seed means, mirroring the usual
  // "mean +/- SEM across training seeds" presentation.
  StatsSummary across_seeds;
};

// Requires at least one run with at least one epoch each.
Report aggregate(std::vector<SeedRun> runs);

}  // namespace batchplan
