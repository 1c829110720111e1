// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "afr/matrix.hpp"
#include "afr/prototype.hpp"
#include "json.hpp"

namespace afr {

struct SoftmaxConfig {
  double learning_rate = 1e-3;
  std::size_t max_iterations = 2000;
  /// Stop once the Frobenius norm of the loss gradient falls to this.
  double gradient_tolerance = 1e-6;
};

/// Linear softmax over classes. Row k of `weights` scores class_ids[k]; its
/// last column is the bias.
struct SoftmaxModel {
  Matrix weights;
  std::vector<int> class_ids;
  std::size_t iterations = 0;
  double final_loss = 0.0;

  std::size_t feature_dim() const noexcept { return weights.cols() ? weights.cols() - 1 : 0; }
  void validate() const;
  /// n x classes logits.
  Matrix scores(const Matrix& features) const;
};

struct SoftmaxLoss {
  double value = 0.0;
  Matrix gradient;
};

/// Mean cross-entropy of `weights` (classes x (dim + 1)) and its gradient.
/// targets[i] is the row of weights holding sample i's class.
SoftmaxLoss softmax_loss(const Matrix& weights, const Matrix& features,
                         std::span<const std::size_t> targets);

/// Full-batch Adam from zero weights. Classes are every distinct label, sorted;
/// each id in `classes` must occur among the labels.
SoftmaxModel softmax_fit(const Matrix& features, std::span<const int> labels,
                         const SoftmaxConfig& config = {}, std::span<const int> classes = {});

/// Argmax over `candidates` (all model classes when empty); ties go to the
/// lowest class id.
std::vector<int> classify(const SoftmaxModel& model, const Matrix& features,
                          std::span<const int> candidates = {});

/// Nearest prototype (compact view) by L2 distance over `candidates` (all
/// classes when empty); ties go to the lowest class id.
std::vector<int> nn1_classify(const PrototypeTable& prototypes, const Matrix& features,
                              std::span<const int> candidates = {});

/// Mean over `class_set` of each class's hit rate, in percent.
double per_class_top1(std::span<const int> predictions, std::span<const int> labels,
                      std::span<const int> class_set,
                      std::map<int, double>* per_class = nullptr);

double harmonic_mean(double u, double s);

struct ResidualStats {
  double median_residual_norm = 0.0;
  double median_prototype_distance = 0.0;
  double ratio = 0.0;
};

/// Median row norm of `residuals` against the median pairwise distance among
/// the rows of `prototypes`.
ResidualStats residual_ratio(const Matrix& residuals, const Matrix& prototypes);

/// Share of rows whose nearest prototype (compact view) is their own class.
double prototype_purity(const Matrix& features, std::span<const int> labels,
                        const PrototypeTable& prototypes);

struct EvaluationReport {
  std::optional<double> u_acc;
  std::optional<double> s_acc;
  std::optional<double> h_mean;
  std::map<int, double> per_class;
  std::optional<double> purity;
  std::optional<ResidualStats> residual_ratio;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
};

void to_json(nlohmann::json& j, const EvaluationReport& r);

/// Test rows of the unseen split (ZSL) or of both splits (GZSL) with labels.
struct TestSplit {
  Matrix features;
  std::vector<int> labels;
};

/// ZSL: candidates restricted to `unseen_classes`; reports U only.
EvaluationReport evaluate_zsl(const SoftmaxModel& model, const TestSplit& unseen,
                              std::span<const int> unseen_classes);
EvaluationReport evaluate_zsl(const PrototypeTable& prototypes, const TestSplit& unseen,
                              std::span<const int> unseen_classes);

/// GZSL: candidates are seen and unseen classes together; reports U, S and H.
EvaluationReport evaluate_gzsl(const SoftmaxModel& model, const TestSplit& seen,
                               const TestSplit& unseen, std::span<const int> seen_classes,
                               std::span<const int> unseen_classes);
EvaluationReport evaluate_gzsl(const PrototypeTable& prototypes, const TestSplit& seen,
                               const TestSplit& unseen, std::span<const int> seen_classes,
                               std::span<const int> unseen_classes);

}  // namespace afr
