// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "afr/matrix.hpp"

namespace afr {

/// Eigen-decomposition of a symmetric matrix. Eigenvalues are sorted in
/// descending order; column k of `vectors` belongs to `values[k]`.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};

/// Cyclic Jacobi rotations until the off-diagonal mass falls below
/// `tolerance` relative to the Frobenius norm.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-15,
                            std::size_t max_sweeps = 100);

/// Linear PCA. `components` has one orthonormal row per retained direction,
/// ordered by decreasing variance, with its largest-magnitude entry positive.
struct PcaModel {
  std::vector<double> mean;
  Matrix components;
  std::vector<double> variances;

  std::size_t input_dim() const noexcept { return mean.size(); }
  std::size_t output_dim() const noexcept { return components.rows(); }
};

/// Requires target_dim <= min(rows - 1, cols).
PcaModel pca_fit(const Matrix& samples, std::size_t target_dim);
/// (x - mean) * components^T, row by row.
Matrix pca_transform(const PcaModel& model, const Matrix& samples);

}  // namespace afr
