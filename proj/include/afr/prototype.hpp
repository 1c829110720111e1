// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "afr/matrix.hpp"
#include "afr/pca.hpp"
#include "afr/svr.hpp"

namespace afr {

/// One visual prototype per class, rows in ascending class-id order. When a
/// selection is attached, compact() is the view restricted to those columns.
struct PrototypeTable {
  std::vector<int> class_ids;
  Matrix prototypes;
  std::optional<std::vector<std::size_t>> selection;

  std::size_t row_of(int class_id) const;
  bool contains(int class_id) const;
  std::span<const double> prototype(int class_id) const { return prototypes.row(row_of(class_id)); }
  /// Selected columns, or the full matrix when no selection is attached.
  Matrix compact() const;
  /// Rows for `ids` (in the order given), selection carried over.
  PrototypeTable subset(std::span<const int> ids) const;
  /// Throws unless rows match ids and every selected index is unique and in range.
  void validate() const;
};

/// Class means of `features` grouped by `labels`. When `classes` is given
/// every listed class must have at least one sample and only those classes
/// are returned; otherwise all labels present are used.
PrototypeTable compute_prototypes(const Matrix& features, std::span<const int> labels,
                                  std::optional<std::span<const int>> classes = std::nullopt);

struct PredictorConfig {
  double alpha = 1.0;
  double delta = 0.1;
  /// RBF width; unset means 1 / (reduced dim * mean reduced-feature variance).
  std::optional<double> gamma;
  /// Reduced semantic dimension; unset means min(s, C - 1).
  std::optional<std::size_t> pca_dim;
  bool use_pca = true;
  bool fit_bias = true;
  double tolerance = 1e-6;
  std::size_t max_iterations = 100000;
  /// Workers for fitting the per-dimension regressors; the result does not
  /// depend on this.
  std::size_t threads = 1;
};

/// One regressor per visual dimension, all sharing the semantic reduction.
struct PredictorBank {
  std::vector<SvrModel> models;
  std::optional<PcaModel> pca;
  /// Training error per dimension: sum_c (prediction_c - prototype_c)^2.
  std::vector<double> errors;

  std::size_t visual_dim() const noexcept { return models.size(); }
  /// Maps raw semantic rows into the regressor input space.
  Matrix reduce(const Matrix& semantics) const;
};

/// Row c of `semantics` describes row c of `prototypes`.
PredictorBank fit_prototype_predictor(const PrototypeTable& prototypes, const Matrix& semantics,
                                      const PredictorConfig& config);

/// Predicted prototypes for raw semantic rows, labelled by `class_ids`.
PrototypeTable predict_prototypes(const PredictorBank& bank, const Matrix& semantics,
                                  std::vector<int> class_ids);

/// All dimension indices ordered by ascending error, ties to the lower index.
std::vector<std::size_t> rank_dimensions(std::span<const double> errors);

/// floor(v / 2), at least 1.
std::size_t default_selection_size(std::size_t visual_dim);

/// The k best-predicted dimensions (k defaults to default_selection_size).
std::vector<std::size_t> select_features(const PredictorBank& bank,
                                         std::optional<std::size_t> k = std::nullopt);
std::vector<std::size_t> select_features(std::span<const double> errors,
                                         std::optional<std::size_t> k = std::nullopt);

/// Column-sliced copy in index order.
Matrix apply_selection(const Matrix& matrix, std::span<const std::size_t> indices);

}  // namespace afr
