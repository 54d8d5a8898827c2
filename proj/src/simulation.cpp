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

#include "batchplan/simulation.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "batchplan/errors.hpp"

namespace batchplan {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string cell_label(const GridCell& cell) {
  std::ostringstream out;
  out << to_string(cell.strategy) << ' '
      << (cell.size.kind == BatchSizeMode::Kind::fixed ? "fixed" : "dynamic")
      << '=' << cell.size.value;
  return out.str();
}

void validate_spec(const SimulationSpec& spec) {
  if (spec.grid.empty()) throw ConfigError("simulation grid is empty");
  if (spec.seeds.empty()) throw ConfigError("simulation seed list is empty");
  if (spec.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (spec.sample_rate < 1) throw ConfigError("sample_rate must be >= 1");
  for (const auto& cell : spec.grid)
    if (cell.size.value < 1)
      throw ConfigError("batch size value must be >= 1 (" + cell_label(cell) + ")");
}

Report run_cell(const Manifest& manifest, const SimulationSpec& spec,
                const GridCell& cell) {
  const std::int64_t original_total = total_length(manifest);
  std::vector<SeedRun> runs;
  runs.reserve(spec.seeds.size());
  for (const std::uint64_t seed : spec.seeds) {
    BatchingConfig config;
    config.strategy = cell.strategy;
    config.size = cell.size;
    config.num_buckets = spec.num_buckets;
    config.bucket_limits = spec.bucket_limits;
    config.seed = seed;
    config.epochs = spec.epochs;
    const auto plans = plan_epochs(manifest, config);
    SeedRun run;
    run.seed = seed;
    run.epochs.reserve(plans.size());
    for (const auto& plan : plans)
      run.epochs.push_back(compute_epoch_stats(plan, original_total));
    runs.push_back(std::move(run));
  }
  return aggregate(std::move(runs));
}

constexpr const char* kMetricNames[] = {
    "zpr",           "total_padding",  "padded_volume", "batch_count",
    "peak_footprint", "footprint_mean", "footprint_std"};

std::array<const MetricSummary*, 7> metric_row(const StatsSummary& s) {
  return {&s.zpr,           &s.total_padding,  &s.padded_volume, &s.batch_count,
          &s.peak_footprint, &s.footprint_mean, &s.footprint_std};
}

ordered_json summary_to_json(const StatsSummary& s) {
  ordered_json out;
  const auto row = metric_row(s);
  for (std::size_t m = 0; m < row.size(); ++m)
    out[kMetricNames[m]] = {{"mean", row[m]->mean}, {"sem", row[m]->sem}};
  return out;
}

ordered_json epoch_to_json(const EpochStats& e) {
  return ordered_json{{"zpr", e.zpr},
                      {"total_padding", e.total_padding},
                      {"padded_volume", e.padded_volume},
                      {"batch_count", e.batch_count},
                      {"peak_footprint", e.peak_footprint},
                      {"footprint_mean", e.footprint_mean},
                      {"footprint_std", e.footprint_std}};
}

// Shortest round-trip decimal form, same as the JSON emitter uses.
std::string format_double(double value) { return ordered_json(value).dump(); }

// --- config-file parsing -------------------------------------------------

[[noreturn]] void config_fail(const std::string& message) {
  throw ConfigError("config: " + message);
}

std::int64_t require_int(const ordered_json& node, const std::string& key) {
  if (!node.is_number_integer())
    config_fail("\"" + key + "\" must be an integer");
  return node.get<std::int64_t>();
}

double require_number(const ordered_json& node, const std::string& key) {
  if (!node.is_number()) config_fail("\"" + key + "\" must be a number");
  return node.get<double>();
}

std::string require_string(const ordered_json& node, const std::string& key) {
  if (!node.is_string()) config_fail("\"" + key + "\" must be a string");
  return node.get<std::string>();
}

// Accepts a scalar or an array of scalars; "strategy": "random" and
// "strategy": ["random"] are the same spec.
std::vector<ordered_json> scalar_or_array(const ordered_json& node,
                                          const std::string& key) {
  std::vector<ordered_json> items;
  if (node.is_array()) {
    if (node.empty()) config_fail("\"" + key + "\" must not be an empty array");
    for (const auto& item : node) items.push_back(item);
  } else {
    items.push_back(node);
  }
  return items;
}

std::int64_t seconds_to_samples(double seconds, std::int64_t sample_rate,
                                const std::string& key) {
  if (!(seconds > 0.0) || !std::isfinite(seconds))
    config_fail("\"" + key + "\" must be a positive number of seconds");
  return static_cast<std::int64_t>(std::floor(seconds * static_cast<double>(sample_rate)));
}

// Seconds/samples key pairs are mutually exclusive so that no silent
// precedence rule is needed.
void reject_pair(bool both, const char* a, const char* b) {
  if (both)
    config_fail(std::string("\"") + a + "\" and \"" + b +
                "\" are mutually exclusive");
}

SynthSource parse_synth(const ordered_json& node, std::int64_t sample_rate) {
  if (!node.is_object()) config_fail("\"synth\" must be an object");
  SynthSource synth;
  bool have_duration = false, have_min = false, have_max = false;
  for (const auto& [key, value] : node.items()) {
    if (key == "duration_seconds" || key == "duration_samples") {
      reject_pair(have_duration, "duration_seconds", "duration_samples");
      synth.total_duration =
          key == "duration_seconds"
              ? seconds_to_samples(require_number(value, key), sample_rate, key)
              : require_int(value, key);
      have_duration = true;
    } else if (key == "seed") {
      synth.seed = static_cast<std::uint64_t>(require_int(value, key));
    } else if (key == "location") {
      synth.spec.location = require_number(value, key);
    } else if (key == "scale") {
      synth.spec.scale = require_number(value, key);
    } else if (key == "min_seconds" || key == "min_samples") {
      reject_pair(have_min, "min_seconds", "min_samples");
      synth.spec.min_length =
          key == "min_seconds"
              ? seconds_to_samples(require_number(value, key), sample_rate, key)
              : require_int(value, key);
      have_min = true;
    } else if (key == "max_seconds" || key == "max_samples") {
      reject_pair(have_max, "max_seconds", "max_samples");
      synth.spec.max_length =
          key == "max_seconds"
              ? seconds_to_samples(require_number(value, key), sample_rate, key)
              : require_int(value, key);
      have_max = true;
    } else {
      config_fail("unknown \"synth\" key \"" + key + "\"");
    }
  }
  if (!have_duration)
    config_fail("\"synth\" needs \"duration_seconds\" or \"duration_samples\"");
  return synth;
}

}  // namespace

Manifest resolve_manifest(const SimulationSpec& spec) {
  if (spec.source.synth) {
    const auto& synth = *spec.source.synth;
    return synth_manifest(synth.spec, synth.total_duration, synth.seed,
                          spec.sample_rate);
  }
  if (spec.source.path.empty())
    throw ConfigError("no manifest source: need a path or a synth spec");
  return load_manifest_file(spec.source.path, spec.source.format,
                            spec.sample_rate);
}

SimulationResult run_simulation(const Manifest& manifest,
                                const SimulationSpec& spec) {
  validate_spec(spec);
  SimulationResult result;
  result.record_count = static_cast<std::int64_t>(manifest.records.size());
  result.total_samples = total_length(manifest);
  result.sample_rate = manifest.sample_rate;
  result.cells.reserve(spec.grid.size());
  for (const auto& cell : spec.grid) {
    try {
      result.cells.push_back({cell, run_cell(manifest, spec, cell)});
    } catch (ConfigError& e) {
      throw ConfigError("[" + cell_label(cell) + "] " + e.what());
    } catch (DataError& e) {
      throw DataError("[" + cell_label(cell) + "] " + e.what());
    } catch (InvariantError& e) {
      throw InvariantError("[" + cell_label(cell) + "] " + e.what());
    }
  }
  return result;
}

SimulationResult run_simulation(const SimulationSpec& spec) {
  validate_spec(spec);
  return run_simulation(resolve_manifest(spec), spec);
}

std::string report_to_json(const SimulationSpec& spec,
                           const SimulationResult& result) {
  ordered_json out;
  out["manifest"] = {{"records", result.record_count},
                     {"total_samples", result.total_samples},
                     {"sample_rate", result.sample_rate}};
  out["settings"] = {{"seeds", spec.seeds},
                     {"epochs", spec.epochs},
                     {"buckets", spec.num_buckets},
                     {"bucket_limits", std::string(to_string(spec.bucket_limits))}};
  out["cells"] = ordered_json::array();
  for (const auto& cell : result.cells) {
    ordered_json node;
    node["strategy"] = std::string(to_string(cell.cell.strategy));
    node["size_mode"] =
        cell.cell.size.kind == BatchSizeMode::Kind::fixed ? "fixed" : "dynamic";
    node["size_value"] = cell.cell.size.value;
    node["across_seeds"] = summary_to_json(cell.report.across_seeds);
    node["per_seed"] = ordered_json::array();
    for (std::size_t i = 0; i < cell.report.runs.size(); ++i) {
      ordered_json seed_node;
      seed_node["seed"] = cell.report.runs[i].seed;
      seed_node["summary"] = summary_to_json(cell.report.per_seed[i]);
      seed_node["epochs"] = ordered_json::array();
      for (const auto& e : cell.report.runs[i].epochs)
        seed_node["epochs"].push_back(epoch_to_json(e));
      node["per_seed"].push_back(std::move(seed_node));
    }
    out["cells"].push_back(std::move(node));
  }
  return out.dump(2) + "\n";
}

std::string report_to_csv(const SimulationSpec& spec,
                          const SimulationResult& result) {
  std::string out = "strategy,size_mode,size_value,buckets,metric,mean,sem\n";
  for (const auto& cell : result.cells) {
    const auto row = metric_row(cell.report.across_seeds);
    const std::string prefix =
        std::string(to_string(cell.cell.strategy)) + ',' +
        (cell.cell.size.kind == BatchSizeMode::Kind::fixed ? "fixed" : "dynamic") +
        ',' + std::to_string(cell.cell.size.value) + ',' +
        (cell.cell.strategy == Strategy::bucket
             ? std::to_string(spec.num_buckets)
             : std::string()) +
        ',';
    for (std::size_t m = 0; m < row.size(); ++m) {
      out += prefix;
      out += kMetricNames[m];
      out += ',';
      out += format_double(row[m]->mean);
      out += ',';
      out += format_double(row[m]->sem);
      out += '\n';
    }
  }
  return out;
}

SimulationSpec simulation_spec_from_json(std::string_view text) {
  const auto root = ordered_json::parse(text, nullptr, false);
  if (root.is_discarded()) config_fail("not valid JSON");
  if (!root.is_object()) config_fail("top level must be an object");

  SimulationSpec spec;
  // Two passes: the sample rate has to be known before any seconds-valued
  // key converts.
  if (const auto it = root.find("sample_rate"); it != root.end())
    spec.sample_rate = require_int(*it, "sample_rate");

  std::vector<Strategy> strategies;
  std::vector<BatchSizeMode> sizes;
  bool have_seeds = false;

  for (const auto& [key, value] : root.items()) {
    if (key == "sample_rate") {
      continue;  // handled above
    } else if (key == "manifest") {
      spec.source.path = require_string(value, key);
    } else if (key == "manifest_format") {
      spec.source.format = parse_manifest_format(require_string(value, key));
    } else if (key == "synth") {
      spec.source.synth = parse_synth(value, spec.sample_rate);
    } else if (key == "strategy") {
      for (const auto& item : scalar_or_array(value, key))
        strategies.push_back(parse_strategy(require_string(item, key)));
    } else if (key == "fixed") {
      for (const auto& item : scalar_or_array(value, key))
        sizes.push_back(BatchSizeMode::fixed(require_int(item, key)));
    } else if (key == "dynamic") {
      for (const auto& item : scalar_or_array(value, key))
        sizes.push_back(BatchSizeMode::dynamic(seconds_to_samples(
            require_number(item, key), spec.sample_rate, key)));
    } else if (key == "buckets") {
      spec.num_buckets = require_int(value, key);
    } else if (key == "bucket_limits") {
      spec.bucket_limits = parse_bucket_limit_mode(require_string(value, key));
    } else if (key == "seed") {
      spec.seeds.clear();
      for (const auto& item : scalar_or_array(value, key))
        spec.seeds.push_back(static_cast<std::uint64_t>(require_int(item, key)));
      have_seeds = true;
    } else if (key == "epochs") {
      spec.epochs = require_int(value, key);
    } else if (key == "format" || key == "out") {
      continue;  // CLI-level keys, valid in the same file
    } else {
      config_fail("unknown key \"" + key + "\"");
    }
  }

  if (!spec.source.path.empty() && spec.source.synth)
    config_fail("\"manifest\" and \"synth\" are mutually exclusive");
  if (strategies.empty()) strategies.push_back(Strategy::random);
  if (sizes.empty()) sizes.push_back(BatchSizeMode::fixed(1));
  if (!have_seeds) spec.seeds = {0, 1, 2, 3, 4};
  for (const auto strategy : strategies)
    for (const auto& size : sizes) spec.grid.push_back({strategy, size});
  return spec;
}

}  // namespace batchplan
