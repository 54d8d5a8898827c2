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

#include "batchplan/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "batchplan/errors.hpp"
#include "batchplan/rng.hpp"

namespace batchplan {

namespace {

[[noreturn]] void fail_row(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

// Integer samples, or a decimal with an "s" suffix converted by
// floor(seconds * sample_rate).
std::int64_t parse_length_field(const std::string& field, std::int64_t sample_rate,
                                std::size_t line_no) {
  if (field.empty()) fail_row(line_no, "empty length field");
  if (field.back() == 's') {
    const std::string seconds_text = field.substr(0, field.size() - 1);
    double seconds = 0.0;
    const auto* begin = seconds_text.data();
    const auto* end = begin + seconds_text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, seconds);
    if (ec != std::errc() || ptr != end)
      fail_row(line_no, "malformed seconds value '" + field + "'");
    return static_cast<std::int64_t>(
        std::floor(seconds * static_cast<double>(sample_rate)));
  }
  std::int64_t samples = 0;
  const auto* begin = field.data();
  const auto* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, samples);
  if (ec != std::errc() || ptr != end)
    fail_row(line_no, "malformed length value '" + field + "'");
  return samples;
}

// Minimal RFC 4180 field splitting: quoted fields may contain commas and
// doubled quotes.
std::vector<std::string> split_csv_row(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"' && current.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (quoted) fail_row(line_no, "unterminated quoted field");
  fields.push_back(std::move(current));
  return fields;
}

void append_record(Manifest& m, std::unordered_set<std::string>& seen,
                   std::string id, std::int64_t length, std::size_t line_no) {
  if (id.empty()) fail_row(line_no, "empty id");
  if (length < 1)
    fail_row(line_no, "non-positive length for id '" + id + "'");
  if (!seen.insert(id).second)
    fail_row(line_no, "duplicate id '" + id + "'");
  m.records.push_back({std::move(id), length});
}

Manifest load_csv(std::istream& in, std::int64_t sample_rate) {
  Manifest m;
  m.sample_rate = sample_rate;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "id,length")
        fail_row(1, "expected header 'id,length', got '" + line + "'");
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_csv_row(line, line_no);
    if (fields.size() != 2)
      fail_row(line_no, "expected 2 fields, got " + std::to_string(fields.size()));
    const std::int64_t length = parse_length_field(fields[1], sample_rate, line_no);
    append_record(m, seen, std::move(fields[0]), length, line_no);
  }
  return m;
}

Manifest load_jsonl(std::istream& in, std::int64_t sample_rate) {
  Manifest m;
  m.sample_rate = sample_rate;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json row = nlohmann::json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object())
      fail_row(line_no, "malformed JSON object");
    if (!row.contains("id") || !row["id"].is_string())
      fail_row(line_no, "missing string field 'id'");
    std::int64_t length = 0;
    if (row.contains("length_samples")) {
      if (!row["length_samples"].is_number_integer())
        fail_row(line_no, "'length_samples' must be an integer");
      length = row["length_samples"].get<std::int64_t>();
    } else if (row.contains("length_seconds")) {
      if (!row["length_seconds"].is_number())
        fail_row(line_no, "'length_seconds' must be a number");
      length = static_cast<std::int64_t>(
          std::floor(row["length_seconds"].get<double>() *
                     static_cast<double>(sample_rate)));
    } else {
      fail_row(line_no, "need 'length_samples' or 'length_seconds'");
    }
    append_record(m, seen, row["id"].get<std::string>(), length, line_no);
  }
  return m;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::int64_t total_length(const Manifest& m) {
  std::int64_t total = 0;
  for (const auto& record : m.records) total += record.length;
  return total;
}

ManifestFormat parse_manifest_format(std::string_view name) {
  if (name == "csv") return ManifestFormat::csv;
  if (name == "jsonl") return ManifestFormat::jsonl;
  throw ConfigError("unknown manifest format '" + std::string(name) + "'");
}

std::string_view to_string(ManifestFormat format) {
  return format == ManifestFormat::csv ? "csv" : "jsonl";
}

Manifest load_manifest(std::istream& in, ManifestFormat format,
                       std::int64_t sample_rate) {
  if (sample_rate < 1) throw ConfigError("sample_rate must be positive");
  Manifest m = format == ManifestFormat::csv ? load_csv(in, sample_rate)
                                             : load_jsonl(in, sample_rate);
  if (m.records.empty()) throw DataError("manifest is empty");
  return m;
}

Manifest load_manifest_file(const std::string& path, ManifestFormat format,
                            std::int64_t sample_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest file: " + path);
  return load_manifest(in, format, sample_rate);
}

void write_manifest(std::ostream& out, const Manifest& m, ManifestFormat format) {
  if (format == ManifestFormat::csv) {
    out << "id,length\n";
    for (const auto& record : m.records)
      out << csv_escape(record.id) << ',' << record.length << '\n';
  } else {
    for (const auto& record : m.records) {
      nlohmann::ordered_json row;
      row["id"] = record.id;
      row["length_samples"] = record.length;
      out << row.dump() << '\n';
    }
  }
}

void write_manifest_file(const std::string& path, const Manifest& m,
                         ManifestFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  write_manifest(out, m, format);
}

Manifest synth_manifest(const DistributionSpec& spec, std::int64_t total_duration,
                        std::uint64_t seed, std::int64_t sample_rate) {
  if (spec.min_length < 1) throw ConfigError("min_length must be >= 1");
  if (spec.min_length > spec.max_length)
    throw ConfigError("min_length must not exceed max_length");
  if (total_duration < spec.max_length)
    throw ConfigError("total_duration must be at least max_length");

  Manifest m;
  m.sample_rate = sample_rate;
  auto rng = derive_stream(seed, "synth", 0);
  std::int64_t cumulative = 0;
  std::size_t index = 0;
  while (cumulative < total_duration) {
    const double raw = std::exp(spec.location + spec.scale * standard_normal(rng));
    const auto clipped = std::clamp<std::int64_t>(
        std::llround(raw), spec.min_length, spec.max_length);
    std::ostringstream id;
    id.width(6);
    id.fill('0');
    id << index++;
    m.records.push_back({id.str(), clipped});
    cumulative += clipped;
  }
  return m;
}

}  // namespace batchplan
