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

#include "batchplan/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "batchplan/errors.hpp"

namespace batchplan {

namespace {

constexpr std::size_t kMetricCount = 7;
using MetricVector = std::array<double, kMetricCount>;

MetricVector to_metrics(const EpochStats& e) {
  return {e.zpr,
          static_cast<double>(e.total_padding),
          static_cast<double>(e.padded_volume),
          static_cast<double>(e.batch_count),
          static_cast<double>(e.peak_footprint),
          e.footprint_mean,
          e.footprint_std};
}

std::int64_t plan_segment_total(const EpochPlan& plan) {
  std::int64_t total = 0;
  for (const auto& batch : plan.batches)
    for (const auto& segment : batch.segments) total += segment.length;
  return total;
}

MetricSummary summarize(const std::vector<MetricVector>& rows, std::size_t m) {
  MetricSummary summary;
  const auto n = static_cast<double>(rows.size());
  for (const auto& row : rows) summary.mean += row[m];
  summary.mean /= n;
  if (rows.size() > 1) {
    double ss = 0.0;
    for (const auto& row : rows) ss += (row[m] - summary.mean) * (row[m] - summary.mean);
    summary.sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return summary;
}

StatsSummary summarize_all(const std::vector<MetricVector>& rows) {
  StatsSummary s;
  s.zpr = summarize(rows, 0);
  s.total_padding = summarize(rows, 1);
  s.padded_volume = summarize(rows, 2);
  s.batch_count = summarize(rows, 3);
  s.peak_footprint = summarize(rows, 4);
  s.footprint_mean = summarize(rows, 5);
  s.footprint_std = summarize(rows, 6);
  return s;
}

MetricVector row_mean(const std::vector<MetricVector>& rows) {
  MetricVector mean{};
  for (const auto& row : rows)
    for (std::size_t m = 0; m < kMetricCount; ++m) mean[m] += row[m];
  for (auto& v : mean) v /= static_cast<double>(rows.size());
  return mean;
}

}  // namespace

std::int64_t padding_of_batch(const Batch& batch) {
  std::int64_t padding = 0;
  for (const auto& segment : batch.segments)
    padding += batch.padded_length - segment.length;
  return padding;
}

std::int64_t batch_footprint(const Batch& batch) {
  return static_cast<std::int64_t>(batch.segments.size()) * batch.padded_length;
}

double zpr(const EpochPlan& plan, std::int64_t original_total) {
  if (plan_segment_total(plan) != original_total)
    throw InvariantError(
        "plan does not cover the dataset: segment lengths sum to " +
        std::to_string(plan_segment_total(plan)) + ", expected " +
        std::to_string(original_total));
  std::int64_t padding = 0;
  for (const auto& batch : plan.batches) padding += padding_of_batch(batch);
  return static_cast<double>(padding) / static_cast<double>(original_total);
}

EpochStats compute_epoch_stats(const EpochPlan& plan,
                               std::int64_t original_total) {
  EpochStats stats;
  stats.zpr = zpr(plan, original_total);  // also validates coverage totals
  double footprint_sum = 0.0;
  for (const auto& batch : plan.batches) {
    stats.total_padding += padding_of_batch(batch);
    const std::int64_t footprint = batch_footprint(batch);
    stats.padded_volume += footprint;
    stats.peak_footprint = std::max(stats.peak_footprint, footprint);
    footprint_sum += static_cast<double>(footprint);
  }
  stats.batch_count = static_cast<std::int64_t>(plan.batches.size());
  if (stats.batch_count > 0) {
    stats.footprint_mean = footprint_sum / static_cast<double>(stats.batch_count);
    double ss = 0.0;
    for (const auto& batch : plan.batches) {
      const double d =
          static_cast<double>(batch_footprint(batch)) - stats.footprint_mean;
      ss += d * d;
    }
    stats.footprint_std = std::sqrt(ss / static_cast<double>(stats.batch_count));
  }
  return stats;
}

Report aggregate(std::vector<SeedRun> runs) {
  if (runs.empty()) throw ConfigError("aggregate needs at least one run");
  for (const auto& run : runs)
    if (run.epochs.empty())
      throw ConfigError("aggregate needs at least one epoch per run");

  Report report;
  report.per_seed.reserve(runs.size());
  std::vector<MetricVector> seed_means;
  seed_means.reserve(runs.size());
  for (const auto& run : runs) {
    std::vector<MetricVector> epoch_rows;
    epoch_rows.reserve(run.epochs.size());
    for (const auto& e : run.epochs) epoch_rows.push_back(to_metrics(e));
    report.per_seed.push_back(summarize_all(epoch_rows));
    seed_means.push_back(row_mean(epoch_rows));
  }
  report.across_seeds = summarize_all(seed_means);
  report.runs = std::move(runs);
  return report;
}

}  // namespace batchplan
