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
#include <string>
#include <vector>

namespace batchplan {

// Contiguous slice [offset, offset + length) of a source sequence. Unsplit
// sequences are single segments at offset 0.
struct Segment {
  std::string sequence_id;
  std::int64_t offset = 0;
  std::int64_t length = 0;  // >= 1

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Segments stacked together after zero-padding every member to the longest
// one (padded_length).
struct Batch {
  std::vector<Segment> segments;  // non-empty
  std::int64_t padded_length = 0;

  friend bool operator==(const Batch&, const Batch&) = default;
};

struct EpochPlan {
  std::vector<Batch> batches;
  int epoch_index = 0;

  friend bool operator==(const EpochPlan&, const EpochPlan&) = default;
};

}  // namespace batchplan
