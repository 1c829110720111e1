// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "afr/matrix.hpp"

namespace afr {

/// exp(-gamma * ||a - b||^2).
double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

struct SvrParams {
  /// Slack penalty; each dual difference is boxed to [-alpha/C, alpha/C] for
  /// C training rows.
  double alpha = 1.0;
  /// Half-width of the insensitive tube.
  double delta = 0.1;
  double gamma = 1.0;
  double tolerance = 1e-6;
  std::size_t max_iterations = 100000;
  /// Without a bias the dual loses its equality constraint and is solved by
  /// single-coordinate updates.
  bool fit_bias = true;
};

/// Trained epsilon-SVR with an RBF kernel: f(e) = sum_c coef_c k(e, e_c) + bias.
struct SvrModel {
  Matrix inputs;
  std::vector<double> coefficients;  // beta_c - beta_bar_c
  double bias = 0.0;
  double gamma = 1.0;
  double delta = 0.1;
  double alpha = 1.0;
  /// Maximal KKT violation of the returned dual point.
  double kkt_violation = 0.0;
  std::size_t iterations = 0;

  friend bool operator==(const SvrModel&, const SvrModel&) = default;
};

/// SMO on the epsilon-SVR dual. Throws SolverError carrying the final KKT
/// residual when the iteration cap is hit first.
SvrModel svr_fit(const Matrix& inputs, std::span<const double> targets, const SvrParams& params);
double svr_predict(const SvrModel& model, std::span<const double> e);

/// sum_c y_c coef_c - delta sum_c |coef_c| - 1/2 coef^T K coef, the quantity
/// the solver maximizes.
double svr_dual_objective(const Matrix& inputs, std::span<const double> targets,
                          std::span<const double> coefficients, double delta, double gamma);

}  // namespace afr
