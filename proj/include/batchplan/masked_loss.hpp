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
#include <cstddef>
#include <vector>

namespace batchplan {

// Row-major N x T_max target/estimate pair plus the valid length of each
// row. Positions at or beyond valid_lengths[i] are padding; no loss below
// ever reads them, which is what makes padded batching safe to train on.
struct PaddedBatch {
  std::size_t rows = 0;
  std::size_t cols = 0;  // T_max
  std::vector<double> targets;    // rows * cols
  std::vector<double> estimates;  // rows * cols
  std::vector<std::int64_t> valid_lengths;

  double target_at(std::size_t r, std::size_t c) const {
    return targets[r * cols + c];
  }
  double estimate_at(std::size_t r, std::size_t c) const {
    return estimates[r * cols + c];
  }
};

// Throws InvariantError when shapes are inconsistent or a valid length
// exceeds T_max.
void validate(const PaddedBatch& batch);

// Row-major N x T_max mask; row i is true exactly on [0, valid_lengths[i]).
std::vector<std::uint8_t> build_mask(const std::vector<std::int64_t>& valid_lengths,
                                     std::int64_t t_max);

enum class LossReduction {
  // Unweighted mean of per-sequence values (default).
  mean_per_sequence,
  // Pool per-row energies into a single ratio before the log.
  pooled,
};

struct MaskedLossOptions {
  double epsilon = 1e-8;  // stabilizer in both numerator and denominator
  LossReduction reduction = LossReduction::mean_per_sequence;
};

// Per row i over valid positions only:
//   snr_i = 10 * log10((sum s^2 + eps) / (sum (s - s_hat)^2 + eps))
// Returns the negated reduction, in dB.
double masked_snr_loss(const PaddedBatch& batch,
                       const MaskedLossOptions& options = {});

// Scale-invariant variant: per row over valid positions, zero-mean both
// signals, project the estimate onto the target
//   s_t = (<s_hat, s> / (|s|^2 + eps)) * s,   e = s_hat - s_t
// and score 10 * log10((|s_t|^2 + eps) / (|e|^2 + eps)). Returns the negated
// reduction. Rows whose valid target is identically zero are defined via eps
// and reported through zero_target_rows when non-null.
double masked_sisnr_loss(const PaddedBatch& batch,
                         const MaskedLossOptions& options = {},
                         std::vector<std::size_t>* zero_target_rows = nullptr);

enum class LossKind { snr, sisnr };

// loss(estimates with [row, col] += delta) - loss(original). Exactly zero
// whenever col >= valid_lengths[row]; the masking check made executable.
double finite_difference_mask_check(const PaddedBatch& batch, std::size_t row,
                                    std::size_t col, double delta,
                                    LossKind kind,
                                    const MaskedLossOptions& options = {});

}  // namespace batchplan
