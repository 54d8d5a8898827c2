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
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace batchplan {

// The canonical length unit everywhere in this library is the sample.
// Seconds appear only at I/O boundaries and convert by floor(sec * rate).

struct SequenceRecord {
  std::string id;           // unique within a manifest
  std::int64_t length = 0;  // samples, >= 1

  friend bool operator==(const SequenceRecord&, const SequenceRecord&) = default;
};

struct Manifest {
  // Order is meaningful: it is the base order that seeded shuffles permute.
  std::vector<SequenceRecord> records;
  std::int64_t sample_rate = 16000;
};

std::int64_t total_length(const Manifest& m);

enum class ManifestFormat { csv, jsonl };

ManifestFormat parse_manifest_format(std::string_view name);
std::string_view to_string(ManifestFormat format);

// CSV: header "id,length"; length is integer samples or a decimal with an
// "s" suffix for seconds. JSONL: one object per line with "id" and either
// "length_samples" or "length_seconds". Both UTF-8, "\n" newlines.
//
// Throws DataError on duplicate ids, non-positive lengths, or malformed
// rows; messages carry the 1-based line number.
Manifest load_manifest(std::istream& in, ManifestFormat format,
                       std::int64_t sample_rate = 16000);
Manifest load_manifest_file(const std::string& path, ManifestFormat format,
                            std::int64_t sample_rate = 16000);

// Writes lengths as integer samples, so write -> load round-trips exactly.
void write_manifest(std::ostream& out, const Manifest& m, ManifestFormat format);
void write_manifest_file(const std::string& path, const Manifest& m,
                         ManifestFormat format);

// Clipped lognormal over sample counts. The defaults approximate a broad
// speech-mixture length distribution with mean 16 s at 16 kHz; they are
// tunable configuration, not ground truth.
struct DistributionSpec {
  double location = 12.440132;  // ln(256000) - scale^2 / 2
  double scale = 0.16;
  std::int64_t min_length = 32'000;     // 2 s at 16 kHz
  std::int64_t max_length = 1'024'000;  // 64 s at 16 kHz
};

// Draws lengths until their sum first reaches total_duration. Deterministic
// given the seed; ids are zero-padded decimal indices from "000000".
// Requires total_duration >= spec.max_length (throws ConfigError otherwise).
Manifest synth_manifest(const DistributionSpec& spec, std::int64_t total_duration,
                        std::uint64_t seed, std::int64_t sample_rate = 16000);

}  // namespace batchplan
