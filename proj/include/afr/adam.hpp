// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "afr/matrix.hpp"
#include "afr/mlp.hpp"

namespace afr {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

/// Moment accumulators for one parameter set.
struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first;
  std::vector<Matrix> second;
  std::size_t step = 0;

  AdamState() = default;
  AdamState(AdamConfig config, std::span<const Matrix* const> params);
  static AdamState for_mlp(AdamConfig config, const MlpParams& params);
};

/// One bias-corrected Adam update in place. Throws TrainingError (carrying the
/// step index that was attempted) if any gradient entry is non-finite; the
/// parameters and state are untouched in that case.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state);
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state);

}  // namespace afr
