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

#include "batchplan/masked_loss.hpp"

#include <cmath>
#include <string>

#include "batchplan/errors.hpp"

namespace batchplan {

namespace {

// Numerator/denominator energies of one row's ratio, computed over the
// valid prefix only. Padded positions are never read, so values stored there
// cannot reach the loss by construction.
struct RowEnergies {
  double reference = 0.0;  // goes in the numerator
  double error = 0.0;      // goes in the denominator
};

RowEnergies snr_row(const PaddedBatch& batch, std::size_t row) {
  RowEnergies energies;
  const auto valid = static_cast<std::size_t>(batch.valid_lengths[row]);
  for (std::size_t c = 0; c < valid; ++c) {
    const double s = batch.target_at(row, c);
    const double d = s - batch.estimate_at(row, c);
    energies.reference += s * s;
    energies.error += d * d;
  }
  return energies;
}

RowEnergies sisnr_row(const PaddedBatch& batch, std::size_t row, double epsilon,
                      bool* zero_target) {
  const auto valid = static_cast<std::size_t>(batch.valid_lengths[row]);
  double target_mean = 0.0;
  double estimate_mean = 0.0;
  bool all_zero = true;
  for (std::size_t c = 0; c < valid; ++c) {
    const double s = batch.target_at(row, c);
    target_mean += s;
    estimate_mean += batch.estimate_at(row, c);
    if (s != 0.0) all_zero = false;
  }
  target_mean /= static_cast<double>(valid);
  estimate_mean /= static_cast<double>(valid);
  if (zero_target) *zero_target = all_zero;

  double dot = 0.0;
  double target_energy = 0.0;
  for (std::size_t c = 0; c < valid; ++c) {
    const double s = batch.target_at(row, c) - target_mean;
    const double e = batch.estimate_at(row, c) - estimate_mean;
    dot += e * s;
    target_energy += s * s;
  }
  const double scale = dot / (target_energy + epsilon);

  RowEnergies energies;
  for (std::size_t c = 0; c < valid; ++c) {
    const double s = batch.target_at(row, c) - target_mean;
    const double e = batch.estimate_at(row, c) - estimate_mean;
    const double projected = scale * s;
    const double residual = e - projected;
    energies.reference += projected * projected;
    energies.error += residual * residual;
  }
  return energies;
}

double reduce(const PaddedBatch& batch, const MaskedLossOptions& options,
              const std::vector<RowEnergies>& rows) {
  const double eps = options.epsilon;
  if (options.reduction == LossReduction::pooled) {
    double reference = 0.0;
    double error = 0.0;
    for (const auto& row : rows) {
      reference += row.reference;
      error += row.error;
    }
    return -10.0 * std::log10((reference + eps) / (error + eps));
  }
  double sum = 0.0;
  for (const auto& row : rows)
    sum += 10.0 * std::log10((row.reference + eps) / (row.error + eps));
  return -sum / static_cast<double>(batch.rows);
}

}  // namespace

void validate(const PaddedBatch& batch) {
  if (batch.rows == 0) throw InvariantError("batch has no rows");
  const std::size_t expected = batch.rows * batch.cols;
  if (batch.targets.size() != expected || batch.estimates.size() != expected)
    throw InvariantError("matrix storage does not match rows * cols");
  if (batch.valid_lengths.size() != batch.rows)
    throw InvariantError("one valid length per row required");
  for (std::size_t r = 0; r < batch.rows; ++r) {
    const std::int64_t valid = batch.valid_lengths[r];
    if (valid < 1 || valid > static_cast<std::int64_t>(batch.cols))
      throw InvariantError("valid length out of range at row " + std::to_string(r));
  }
}

std::vector<std::uint8_t> build_mask(const std::vector<std::int64_t>& valid_lengths,
                                     std::int64_t t_max) {
  std::vector<std::uint8_t> mask;
  mask.reserve(valid_lengths.size() * static_cast<std::size_t>(t_max));
  for (const std::int64_t valid : valid_lengths) {
    if (valid > t_max)
      throw InvariantError("valid length exceeds padded length");
    for (std::int64_t c = 0; c < t_max; ++c)
      mask.push_back(c < valid ? 1 : 0);
  }
  return mask;
}

double masked_snr_loss(const PaddedBatch& batch,
                       const MaskedLossOptions& options) {
  validate(batch);
  std::vector<RowEnergies> rows;
  rows.reserve(batch.rows);
  for (std::size_t r = 0; r < batch.rows; ++r)
    rows.push_back(snr_row(batch, r));
  return reduce(batch, options, rows);
}

double masked_sisnr_loss(const PaddedBatch& batch,
                         const MaskedLossOptions& options,
                         std::vector<std::size_t>* zero_target_rows) {
  validate(batch);
  if (zero_target_rows) zero_target_rows->clear();
  std::vector<RowEnergies> rows;
  rows.reserve(batch.rows);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    bool zero_target = false;
    rows.push_back(sisnr_row(batch, r, options.epsilon, &zero_target));
    if (zero_target && zero_target_rows) zero_target_rows->push_back(r);
  }
  return reduce(batch, options, rows);
}

double finite_difference_mask_check(const PaddedBatch& batch, std::size_t row,
                                    std::size_t col, double delta,
                                    LossKind kind,
                                    const MaskedLossOptions& options) {
  auto eval = [&](const PaddedBatch& b) {
    return kind == LossKind::snr ? masked_snr_loss(b, options)
                                 : masked_sisnr_loss(b, options);
  };
  const double original = eval(batch);
  PaddedBatch perturbed = batch;
  perturbed.estimates[row * batch.cols + col] += delta;
  return eval(perturbed) - original;
}

}  // namespace batchplan
