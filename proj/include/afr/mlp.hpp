// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>

#include "afr/autodiff.hpp"
#include "afr/matrix.hpp"
#include "afr/random.hpp"

namespace afr {

/// Three affine layers, ReLU after the first two, identity output.
/// Weights are fan_in x fan_out so a batch maps as X * W + b.
struct MlpParams {
  Matrix w1, b1, w2, b2, w3, b3;

  static MlpParams zeros(std::size_t in, std::size_t hidden, std::size_t out);
  /// Uniform in +-sqrt(6 / (fan_in + fan_out)); biases zero.
  static MlpParams glorot(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);

  std::size_t input_dim() const noexcept { return w1.rows(); }
  std::size_t hidden_dim() const noexcept { return w1.cols(); }
  std::size_t output_dim() const noexcept { return w3.cols(); }

  std::array<Matrix*, 6> tensors() { return {&w1, &b1, &w2, &b2, &w3, &b3}; }
  std::array<const Matrix*, 6> tensors() const { return {&w1, &b1, &w2, &b2, &w3, &b3}; }

  /// Throws DimensionError unless the layer shapes compose.
  void validate() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Parameter gradients share the parameter layout.
using MlpGrads = MlpParams;

struct MlpVars {
  Var w1, b1, w2, b2, w3, b3;
};

/// Records the parameters on `tape`, as variables when `trainable`.
MlpVars bind(Tape& tape, const MlpParams& params, bool trainable);
MlpGrads gradients_of(const Gradients& grads, const MlpVars& vars);

/// Forward pass recorded on a tape. The pre-activations are kept so the input
/// gradient can be rebuilt with frozen ReLU masks.
struct MlpTrace {
  Var output;
  Var pre1, pre2;
};

MlpTrace mlp_forward(Tape& tape, const MlpVars& vars, Var input);
Matrix mlp_forward(const MlpParams& params, const Matrix& input);

/// Records d(sum of outputs)/d(input[:, 0:x_cols]) for a scalar-output MLP as a
/// differentiable expression of the weights. Row i of the result is the
/// gradient of output row i with respect to the first x_cols input columns.
Var input_gradient(Tape& tape, const MlpVars& vars, const MlpTrace& trace, std::size_t x_cols);

/// Gradient of the scalar output with respect to x for the input row (x | condition).
Matrix input_gradient(const MlpParams& params, const Matrix& x, const Matrix& condition);

/// lambda * mean_i (||grad_x D(x_i | c_i)||_2 - 1)^2 recorded on `tape`.
/// `x_bar` and `condition` must already be tape nodes.
Var gradient_penalty(Tape& tape, const MlpVars& vars, Var x_bar, Var condition, double lambda);

struct PenaltyResult {
  double value = 0.0;
  MlpGrads grads;
  /// Rows whose input gradient vanished; the norm derivative there is taken as 0.
  std::size_t zero_norm_rows = 0;
};

PenaltyResult gradient_penalty(const MlpParams& params, const Matrix& x_bar,
                               const Matrix& condition, double lambda);

}  // namespace afr
