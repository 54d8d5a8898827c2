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

#include "batchplan/packer.hpp"

#include <algorithm>

#include "batchplan/errors.hpp"

namespace batchplan {

std::vector<Segment> whole_segments(const Manifest& m) {
  std::vector<Segment> segments;
  segments.reserve(m.records.size());
  for (const auto& record : m.records)
    segments.push_back({record.id, 0, record.length});
  return segments;
}

std::vector<Segment> split_sequences(const Manifest& m, std::int64_t budget) {
  if (budget < 1) throw ConfigError("split budget must be >= 1");
  std::vector<Segment> segments;
  for (const auto& record : m.records) {
    for (std::int64_t offset = 0; offset < record.length; offset += budget) {
      const std::int64_t length = std::min(budget, record.length - offset);
      segments.push_back({record.id, offset, length});
    }
  }
  return segments;
}

std::vector<Batch> pack_fixed(std::span<const Segment> segments, std::int64_t k) {
  if (k < 1) throw ConfigError("fixed batch size must be >= 1");
  std::vector<Batch> batches;
  batches.reserve((segments.size() + static_cast<std::size_t>(k) - 1) /
                  static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < segments.size(); i += static_cast<std::size_t>(k)) {
    const std::size_t end = std::min(segments.size(), i + static_cast<std::size_t>(k));
    Batch batch;
    batch.segments.assign(segments.begin() + static_cast<std::ptrdiff_t>(i),
                          segments.begin() + static_cast<std::ptrdiff_t>(end));
    for (const auto& segment : batch.segments)
      batch.padded_length = std::max(batch.padded_length, segment.length);
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<Batch> pack_dynamic(std::span<const Segment> segments,
                                std::int64_t budget) {
  if (budget < 1) throw ConfigError("dynamic budget must be >= 1");
  std::vector<Batch> batches;
  Batch open;
  for (const auto& segment : segments) {
    if (segment.length > budget)
      throw InvariantError("segment longer than the dynamic budget; "
                           "split_sequences was not applied");
    const std::int64_t padded = std::max(open.padded_length, segment.length);
    const auto count = static_cast<std::int64_t>(open.segments.size());
    if (!open.segments.empty() && (count + 1) * padded > budget) {
      batches.push_back(std::move(open));
      open = Batch{};
    }
    open.padded_length = std::max(open.padded_length, segment.length);
    open.segments.push_back(segment);
  }
  if (!open.segments.empty()) batches.push_back(std::move(open));
  return batches;
}

}  // namespace batchplan
