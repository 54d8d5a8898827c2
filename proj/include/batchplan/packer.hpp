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
#include <span>
#include <vector>

#include "batchplan/manifest.hpp"
#include "batchplan/plan.hpp"

namespace batchplan {

// One whole-sequence segment per record, in manifest order.
std::vector<Segment> whole_segments(const Manifest& m);

// Tiles each sequence of length L into ceil(L / budget) segments: full
// budget-sized pieces plus one shorter remainder when budget does not divide
// L. Remainders are kept, never dropped or overlapped. Output order: source
// sequence, then offset.
std::vector<Segment> split_sequences(const Manifest& m, std::int64_t budget);

// Consecutive runs of k segments in stream order; the final batch may hold
// fewer. Emits ceil(n / k) batches.
std::vector<Batch> pack_fixed(std::span<const Segment> segments, std::int64_t k);

// Greedy single pass: a segment joins the open batch iff
// (count + 1) * max(padded_length, segment.length) <= budget, otherwise the
// batch closes and a new one opens. Every emitted batch satisfies
// count * padded_length <= budget. A segment longer than the budget throws
// InvariantError (it signals a missing split_sequences pass).
std::vector<Batch> pack_dynamic(std::span<const Segment> segments,
                                std::int64_t budget);

}  // namespace batchplan
