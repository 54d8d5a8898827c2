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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "batchplan/manifest.hpp"
#include "batchplan/planner.hpp"
#include "batchplan/stats.hpp"

namespace batchplan {

struct SynthSource {
  DistributionSpec spec;
  std::int64_t total_duration = 0;  // samples
  std::uint64_t seed = 0;
};

// Either a manifest file or a synthesis recipe.
struct ManifestSource {
  std::string path;
  ManifestFormat format = ManifestFormat::csv;
  std::optional<SynthSource> synth;
};

struct GridCell {
  Strategy strategy = Strategy::random;
  BatchSizeMode size = BatchSizeMode::fixed(1);

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct SimulationSpec {
  ManifestSource source;
  std::int64_t sample_rate = 16000;
  std::vector<GridCell> grid;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::int64_t epochs = 1;
  std::int64_t num_buckets = 10;
  BucketLimitMode bucket_limits = BucketLimitMode::uniform;
};

struct CellReport {
  GridCell cell;
  Report report;
};

struct SimulationResult {
  std::int64_t record_count = 0;
  std::int64_t total_samples = 0;
  std::int64_t sample_rate = 16000;
  std::vector<CellReport> cells;
};

Manifest resolve_manifest(const SimulationSpec& spec);

// Plans every (grid cell, seed, epoch), computes per-epoch stats, and
// aggregates. Each cell's result depends only on (manifest, cell, seeds,
// epochs, bucket settings), never on the other cells. Fully deterministic.
SimulationResult run_simulation(const Manifest& manifest,
                                const SimulationSpec& spec);
SimulationResult run_simulation(const SimulationSpec& spec);

// Report serializations. Both are deterministic byte-for-byte for a given
// (manifest bytes, spec).
std::string report_to_json(const SimulationSpec& spec,
                           const SimulationResult& result);
// One row per cell x metric: strategy, size mode, size value, buckets,
// metric name, across-seed mean and SEM.
std::string report_to_csv(const SimulationSpec& spec,
                          const SimulationResult& result);

// Config-file form of SimulationSpec; the same keys the CLI flags map onto.
SimulationSpec simulation_spec_from_json(std::string_view text);

}  // namespace batchplan
