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
//
// batchplan: plan batches for variable-length sequence datasets and measure
// the padding cost. Subcommands: synth, plan, stats, loss-check.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "batchplan/errors.hpp"
#include "batchplan/manifest.hpp"
#include "batchplan/masked_loss.hpp"
#include "batchplan/plan_io.hpp"
#include "batchplan/planner.hpp"
#include "batchplan/simulation.hpp"
#include "batchplan/stats.hpp"

namespace {

using batchplan::ConfigError;
using batchplan::DataError;
using batchplan::InvariantError;
using ordered_json = nlohmann::ordered_json;

// Options shared by synth/plan/stats. Flags override the config file, so
// every passed flag is written into the config JSON before it is parsed;
// that keeps one code path and one precedence rule.
struct CommonCli {
  std::string config_path;
  std::string manifest_path;
  std::string manifest_format;
  std::vector<std::string> strategies;
  std::vector<std::int64_t> fixed_sizes;
  std::vector<double> dynamic_seconds;
  std::int64_t buckets = 0;
  std::string bucket_limits;
  std::vector<std::int64_t> seeds;
  std::int64_t epochs = 0;
  std::int64_t sample_rate = 0;
  std::string format;
  std::string out;

  // synth-only
  double duration_seconds = 0.0;
  std::int64_t synth_seed = 0;
  double location = 0.0;
  double scale = 0.0;
  double min_seconds = 0.0;
  double max_seconds = 0.0;
};

struct OptionSet {
  CLI::Option* manifest = nullptr;
  CLI::Option* manifest_format = nullptr;
  CLI::Option* strategy = nullptr;
  CLI::Option* fixed = nullptr;
  CLI::Option* dynamic = nullptr;
  CLI::Option* buckets = nullptr;
  CLI::Option* bucket_limits = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* epochs = nullptr;
  CLI::Option* sample_rate = nullptr;
  CLI::Option* format = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* duration = nullptr;
  CLI::Option* synth_seed = nullptr;
  CLI::Option* location = nullptr;
  CLI::Option* scale = nullptr;
  CLI::Option* min_seconds = nullptr;
  CLI::Option* max_seconds = nullptr;
};

void add_config_option(CLI::App* cmd, CommonCli& cli) {
  cmd->add_option("--config", cli.config_path,
                  "JSON config file; flags override its keys");
}

void add_source_options(CLI::App* cmd, CommonCli& cli, OptionSet& opts) {
  opts.manifest =
      cmd->add_option("--manifest", cli.manifest_path, "manifest file to load");
  opts.manifest_format =
      cmd->add_option("--manifest-format", cli.manifest_format,
                      "manifest file format")
          ->check(CLI::IsMember({"csv", "jsonl"}));
  opts.duration = cmd->add_option("--synth-duration", cli.duration_seconds,
                                  "synthesize a manifest of this many seconds");
  opts.synth_seed =
      cmd->add_option("--synth-seed", cli.synth_seed, "synthesis seed");
  opts.manifest->excludes(opts.duration);
}

void add_grid_options(CLI::App* cmd, CommonCli& cli, OptionSet& opts) {
  opts.strategy = cmd->add_option("--strategy", cli.strategies,
                                  "batching strategy (repeatable)")
                      ->check(CLI::IsMember({"random", "sorted", "bucket"}))
                      ->delimiter(',');
  opts.fixed = cmd->add_option("--fixed", cli.fixed_sizes,
                               "fixed batch size in sequences (repeatable)")
                   ->delimiter(',');
  opts.dynamic = cmd->add_option("--dynamic", cli.dynamic_seconds,
                                 "dynamic batch budget in seconds (repeatable)")
                     ->delimiter(',');
  opts.buckets = cmd->add_option("--buckets", cli.buckets,
                                 "bucket count for the bucket strategy");
  opts.bucket_limits = cmd->add_option("--bucket-limits", cli.bucket_limits,
                                       "bucket boundary placement")
                           ->check(CLI::IsMember({"uniform", "quantile"}));
  opts.seed = cmd->add_option("--seed", cli.seeds, "batching seed (repeatable)")
                  ->delimiter(',');
  opts.epochs = cmd->add_option("--epochs", cli.epochs, "epochs to plan");
  opts.sample_rate =
      cmd->add_option("--sample-rate", cli.sample_rate, "samples per second");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw DataError("short write to " + path);
}

ordered_json load_config_json(const std::string& path) {
  if (path.empty()) return ordered_json::object();
  const auto root = ordered_json::parse(read_text_file(path), nullptr, false);
  if (root.is_discarded())
    throw ConfigError("config " + path + " is not valid JSON");
  if (!root.is_object())
    throw ConfigError("config " + path + " must hold a JSON object");
  return root;
}

// Writes every flag the user actually passed into the config object; the
// merged object is then parsed exactly like a pure config file.
ordered_json merge_flags(const CommonCli& cli, const OptionSet& opts) {
  ordered_json root = load_config_json(cli.config_path);
  auto passed = [](const CLI::Option* opt) { return opt && opt->count() > 0; };

  if (passed(opts.sample_rate)) root["sample_rate"] = cli.sample_rate;
  if (passed(opts.manifest)) {
    root["manifest"] = cli.manifest_path;
    root.erase("synth");
  }
  if (passed(opts.manifest_format)) root["manifest_format"] = cli.manifest_format;
  if (passed(opts.duration)) {
    if (!root.contains("synth")) root["synth"] = ordered_json::object();
    root["synth"]["duration_seconds"] = cli.duration_seconds;
    root["synth"].erase("duration_samples");
    root.erase("manifest");
    root.erase("manifest_format");
  }
  if (passed(opts.synth_seed)) root["synth"]["seed"] = cli.synth_seed;
  if (passed(opts.location)) root["synth"]["location"] = cli.location;
  if (passed(opts.scale)) root["synth"]["scale"] = cli.scale;
  if (passed(opts.min_seconds)) {
    root["synth"]["min_seconds"] = cli.min_seconds;
    root["synth"].erase("min_samples");
  }
  if (passed(opts.max_seconds)) {
    root["synth"]["max_seconds"] = cli.max_seconds;
    root["synth"].erase("max_samples");
  }
  if (passed(opts.strategy)) root["strategy"] = cli.strategies;
  if (passed(opts.fixed) || passed(opts.dynamic)) {
    root.erase("fixed");
    root.erase("dynamic");
    if (passed(opts.fixed)) root["fixed"] = cli.fixed_sizes;
    if (passed(opts.dynamic)) root["dynamic"] = cli.dynamic_seconds;
  }
  if (passed(opts.buckets)) root["buckets"] = cli.buckets;
  if (passed(opts.bucket_limits)) root["bucket_limits"] = cli.bucket_limits;
  if (passed(opts.seed)) root["seed"] = cli.seeds;
  if (passed(opts.epochs)) root["epochs"] = cli.epochs;
  return root;
}

// "format"/"out" live beside the spec keys in the config file.
std::string effective_format(const ordered_json& root, const CLI::Option* opt,
                             const std::string& flag_value,
                             const std::string& fallback) {
  if (opt && opt->count() > 0) return flag_value;
  if (root.contains("format")) {
    if (!root["format"].is_string())
      throw ConfigError("config: \"format\" must be a string");
    return root["format"].get<std::string>();
  }
  return fallback;
}

std::string effective_out(const ordered_json& root, const CLI::Option* opt,
                          const std::string& flag_value) {
  if (opt && opt->count() > 0) return flag_value;
  if (root.contains("out")) {
    if (!root["out"].is_string())
      throw ConfigError("config: \"out\" must be a string");
    return root["out"].get<std::string>();
  }
  return {};
}

std::string format_hash(std::uint64_t hash) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "0x%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

// --- synth ----------------------------------------------------------------

int run_synth(const CommonCli& cli, const OptionSet& opts) {
  ordered_json root = merge_flags(cli, opts);
  const std::string format = effective_format(root, opts.format, cli.format, "csv");
  const std::string out = effective_out(root, opts.out, cli.out);
  const auto spec = batchplan::simulation_spec_from_json(root.dump());
  if (!spec.source.synth)
    throw ConfigError("synth needs --synth-duration or a \"synth\" config key");

  const auto manifest = batchplan::resolve_manifest(spec);
  std::ostringstream buffer;
  write_manifest(buffer, manifest,
                 batchplan::parse_manifest_format(format == "json" ? "jsonl" : format));
  write_text(out, buffer.str());
  std::cerr << manifest.records.size() << " sequences, "
            << batchplan::total_length(manifest) << " samples\n";
  return 0;
}

// --- plan -----------------------------------------------------------------

int run_plan(const CommonCli& cli, const OptionSet& opts) {
  ordered_json root = merge_flags(cli, opts);
  if (!root.contains("seed")) root["seed"] = 0;  // plans are single-seed
  const std::string out = effective_out(root, opts.out, cli.out);
  const auto spec = batchplan::simulation_spec_from_json(root.dump());
  if (spec.grid.size() != 1)
    throw ConfigError("plan takes exactly one strategy and one size");
  if (spec.seeds.size() != 1) throw ConfigError("plan takes exactly one seed");

  const auto manifest = batchplan::resolve_manifest(spec);
  batchplan::BatchingConfig config;
  config.strategy = spec.grid[0].strategy;
  config.size = spec.grid[0].size;
  config.num_buckets = spec.num_buckets;
  config.bucket_limits = spec.bucket_limits;
  config.seed = spec.seeds[0];
  config.epochs = spec.epochs;
  const auto plans = batchplan::plan_epochs(manifest, config);

  write_text(out, batchplan::dump_plans_string(plans));
  const std::string hash_line =
      "plan_hash " + format_hash(batchplan::plan_hash(plans)) + "\n";
  // Keep a stdout dump parseable as JSONL: the hash goes to stderr then.
  if (out.empty() || out == "-")
    std::cerr << hash_line;
  else
    std::cout << hash_line;
  return 0;
}

// --- stats ----------------------------------------------------------------

int run_stats(const CommonCli& cli, const OptionSet& opts) {
  ordered_json root = merge_flags(cli, opts);
  const std::string format = effective_format(root, opts.format, cli.format, "csv");
  const std::string out = effective_out(root, opts.out, cli.out);
  if (format != "csv" && format != "json")
    throw ConfigError("stats --format must be csv or json");
  const auto spec = batchplan::simulation_spec_from_json(root.dump());

  const auto manifest = batchplan::resolve_manifest(spec);
  batchplan::SimulationResult merged;
  merged.record_count = static_cast<std::int64_t>(manifest.records.size());
  merged.total_samples = batchplan::total_length(manifest);
  merged.sample_rate = manifest.sample_rate;

  const auto flush = [&] {
    write_text(out, format == "csv" ? report_to_csv(spec, merged)
                                    : report_to_json(spec, merged));
  };
  // Cells are independent; on error, flush what completed before rethrowing.
  for (const auto& cell : spec.grid) {
    batchplan::SimulationSpec sub = spec;
    sub.grid = {cell};
    try {
      auto result = run_simulation(manifest, sub);
      merged.cells.push_back(std::move(result.cells[0]));
    } catch (...) {
      flush();
      throw;
    }
  }
  flush();
  return 0;
}

// --- loss-check -------------------------------------------------------------

std::vector<double> parse_matrix(const ordered_json& node, const char* key,
                                 std::size_t& rows, std::size_t& cols) {
  if (!node.is_array() || node.empty())
    throw DataError(std::string("batch fixture: \"") + key +
                    "\" must be a non-empty array of rows");
  rows = node.size();
  cols = 0;
  std::vector<double> values;
  for (const auto& row : node) {
    if (!row.is_array())
      throw DataError(std::string("batch fixture: \"") + key +
                      "\" rows must be arrays");
    if (cols == 0) cols = row.size();
    if (row.size() != cols)
      throw DataError(std::string("batch fixture: ragged \"") + key + "\" rows");
    for (const auto& v : row) {
      if (!v.is_number())
        throw DataError(std::string("batch fixture: \"") + key +
                        "\" entries must be numbers");
      values.push_back(v.get<double>());
    }
  }
  return values;
}

batchplan::PaddedBatch load_batch_fixture(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const ConfigError& e) {
    throw DataError(e.what());  // a fixture is data, not config
  }
  const auto root = ordered_json::parse(text, nullptr, false);
  if (root.is_discarded())
    throw DataError("batch fixture " + path + " is not valid JSON");
  if (!root.is_object() || !root.contains("targets") ||
      !root.contains("estimates") || !root.contains("valid_lengths"))
    throw DataError("batch fixture needs targets, estimates, valid_lengths");

  batchplan::PaddedBatch batch;
  std::size_t est_rows = 0, est_cols = 0;
  batch.targets = parse_matrix(root["targets"], "targets", batch.rows, batch.cols);
  batch.estimates = parse_matrix(root["estimates"], "estimates", est_rows, est_cols);
  if (est_rows != batch.rows || est_cols != batch.cols)
    throw DataError("batch fixture: targets and estimates shapes differ");
  if (!root["valid_lengths"].is_array() ||
      root["valid_lengths"].size() != batch.rows)
    throw DataError("batch fixture: valid_lengths must list one value per row");
  for (const auto& v : root["valid_lengths"]) {
    if (!v.is_number_integer())
      throw DataError("batch fixture: valid_lengths must be integers");
    batch.valid_lengths.push_back(v.get<std::int64_t>());
  }
  try {
    batchplan::validate(batch);
  } catch (const InvariantError& e) {
    throw DataError(std::string("batch fixture: ") + e.what());
  }
  return batch;
}

std::string format_loss(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

int run_loss_check(const std::string& batch_path, double epsilon,
                   const std::string& reduction) {
  batchplan::MaskedLossOptions options;
  options.epsilon = epsilon;
  options.reduction = reduction == "pooled"
                          ? batchplan::LossReduction::pooled
                          : batchplan::LossReduction::mean_per_sequence;

  const auto batch = load_batch_fixture(batch_path);
  std::vector<std::size_t> zero_rows;
  const double snr = masked_snr_loss(batch, options);
  const double sisnr = masked_sisnr_loss(batch, options, &zero_rows);
  std::cout << "masked_snr_loss " << format_loss(snr) << "\n";
  std::cout << "masked_sisnr_loss " << format_loss(sisnr) << "\n";
  for (const auto row : zero_rows)
    std::cerr << "warning: row " << row
              << " target is all-zero in its valid region; si-snr is "
                 "epsilon-defined\n";

  // Perturb every padded entry and demand bit-identical losses.
  batchplan::PaddedBatch poked = batch;
  const auto mask = batchplan::build_mask(
      batch.valid_lengths, static_cast<std::int64_t>(batch.cols));
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) {
      poked.estimates[i] += 1e6;
      poked.targets[i] -= 1e6;
    }
  const double snr2 = masked_snr_loss(poked, options);
  const double sisnr2 = masked_sisnr_loss(poked, options);
  if (snr2 != snr || sisnr2 != sisnr) {
    std::cout << "mask_invariance FAIL\n";
    throw InvariantError("losses changed under padded-entry perturbation");
  }
  std::cout << "mask_invariance ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch planning and padding statistics for variable-length "
               "sequence datasets"};
  app.require_subcommand(1);

  CommonCli synth_cli, plan_cli, stats_cli;
  OptionSet synth_opts, plan_opts, stats_opts;

  auto* synth = app.add_subcommand(
      "synth", "synthesize a manifest from a clipped lognormal");
  add_config_option(synth, synth_cli);
  synth_opts.duration = synth->add_option(
      "--duration", synth_cli.duration_seconds, "total dataset seconds");
  synth_opts.synth_seed =
      synth->add_option("--seed", synth_cli.synth_seed, "synthesis seed");
  synth_opts.location =
      synth->add_option("--location", synth_cli.location, "lognormal location");
  synth_opts.scale =
      synth->add_option("--scale", synth_cli.scale, "lognormal scale");
  synth_opts.min_seconds = synth->add_option(
      "--min-seconds", synth_cli.min_seconds, "clip lengths below this");
  synth_opts.max_seconds = synth->add_option(
      "--max-seconds", synth_cli.max_seconds, "clip lengths above this");
  synth_opts.sample_rate = synth->add_option(
      "--sample-rate", synth_cli.sample_rate, "samples per second");
  synth_opts.format = synth->add_option("--format", synth_cli.format,
                                        "manifest format")
                          ->check(CLI::IsMember({"csv", "jsonl", "json"}));
  synth_opts.out = synth->add_option("--out", synth_cli.out, "output path");

  auto* plan = app.add_subcommand("plan", "emit a JSONL plan dump and its hash");
  add_config_option(plan, plan_cli);
  add_source_options(plan, plan_cli, plan_opts);
  add_grid_options(plan, plan_cli, plan_opts);
  plan_opts.out = plan->add_option("--out", plan_cli.out, "output path");

  auto* stats = app.add_subcommand(
      "stats", "simulate a strategy/size grid and report padding statistics");
  add_config_option(stats, stats_cli);
  add_source_options(stats, stats_cli, stats_opts);
  add_grid_options(stats, stats_cli, stats_opts);
  stats_opts.format = stats->add_option("--format", stats_cli.format,
                                        "report format")
                          ->check(CLI::IsMember({"csv", "json"}));
  stats_opts.out = stats->add_option("--out", stats_cli.out, "output path");

  auto* loss = app.add_subcommand(
      "loss-check", "evaluate masked losses on a JSON batch fixture");
  std::string batch_path;
  double epsilon = 1e-8;
  std::string reduction = "mean_per_sequence";
  loss->add_option("batch", batch_path, "batch fixture JSON file")->required();
  loss->add_option("--epsilon", epsilon, "loss stabilizer")->default_val(1e-8);
  loss->add_option("--reduction", reduction, "loss reduction")
      ->check(CLI::IsMember({"mean_per_sequence", "pooled"}))
      ->default_val("mean_per_sequence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are config errors
  }

  try {
    if (synth->parsed()) return run_synth(synth_cli, synth_opts);
    if (plan->parsed()) return run_plan(plan_cli, plan_opts);
    if (stats->parsed()) return run_stats(stats_cli, stats_opts);
    return run_loss_check(batch_path, epsilon, reduction);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 4;
  }
}
