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

#include "batchplan/plan_io.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace batchplan {

namespace {

// Hand-rolled writer so the field order and byte layout stay stable; the
// dump doubles as the canonical hashing input.
void append_json_string(std::string& out, const std::string& value) {
  out.push_back('"');
  for (const char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buffer[8];
          std::snprintf(buffer, sizeof(buffer), "\\u%04x",
                        static_cast<unsigned>(static_cast<unsigned char>(c)));
          out += buffer;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

void append_batch_line(std::string& out, int epoch, std::size_t batch_index,
                       const Batch& batch) {
  out += "{\"epoch\":";
  out += std::to_string(epoch);
  out += ",\"batch\":";
  out += std::to_string(batch_index);
  out += ",\"segments\":[";
  bool first = true;
  for (const auto& segment : batch.segments) {
    if (!first) out.push_back(',');
    first = false;
    out.push_back('[');
    append_json_string(out, segment.sequence_id);
    out.push_back(',');
    out += std::to_string(segment.offset);
    out.push_back(',');
    out += std::to_string(segment.length);
    out.push_back(']');
  }
  out += "],\"padded_length\":";
  out += std::to_string(batch.padded_length);
  out += "}\n";
}

}  // namespace

std::string dump_plans_string(std::span<const EpochPlan> plans) {
  std::string out;
  for (const auto& plan : plans)
    for (std::size_t b = 0; b < plan.batches.size(); ++b)
      append_batch_line(out, plan.epoch_index, b, plan.batches[b]);
  return out;
}

void dump_plans(std::ostream& out, std::span<const EpochPlan> plans) {
  out << dump_plans_string(plans);
}

std::uint64_t plan_hash(std::span<const EpochPlan> plans) {
  const std::string dump = dump_plans_string(plans);
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV offset basis
  for (const unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace batchplan
