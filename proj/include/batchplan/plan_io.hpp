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
#include <span>
#include <string>

#include "batchplan/plan.hpp"

namespace batchplan {

// JSONL plan dump, one batch per line with a stable field order:
// {"epoch":0,"batch":0,"segments":[["id",offset,length],...],"padded_length":N}
void dump_plans(std::ostream& out, std::span<const EpochPlan> plans);
std::string dump_plans_string(std::span<const EpochPlan> plans);

// FNV-1a 64 over the canonical dump bytes. The empty plan list hashes to the
// FNV offset basis.
std::uint64_t plan_hash(std::span<const EpochPlan> plans);

}  // namespace batchplan
