// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "afr/classifier.hpp"
#include "afr/data.hpp"
#include "afr/gan.hpp"
#include "afr/prototype.hpp"
#include "json.hpp"

namespace afr {

/// Every knob of an end-to-end run. One master seed drives the benchmark
/// generator, GAN training and feature synthesis.
struct RunConfig {
  std::uint64_t seed = 7;
  SyntheticBenchmarkConfig benchmark;
  PredictorConfig svr;
  /// Selected dimensions; unset means half the visual dimension.
  std::optional<std::size_t> k;
  bool selection = true;
  GanConfig gan;
  SoftmaxConfig classifier;
  /// Synthetic features per unseen class.
  std::size_t per_class = 300;
  bool gzsl = false;
  std::string data_dir;
  std::string out_dir = "run";

  /// Pushes the master seed into the sub-configs that carry one.
  RunConfig resolved() const;
  void validate() const;
};

/// Sub-config seeds are not serialized; the top-level "seed" is authoritative.
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

/// Accepts a bare RunConfig object or a report carrying one under "config".
RunConfig load_run_config(const std::filesystem::path& path);

/// Semantic-to-visual stage output, for every class of the dataset.
struct PrototypeArtifacts {
  /// Ascending; row k of the matrices below belongs to class_ids[k].
  std::vector<int> class_ids;
  Matrix predicted;
  /// Semantics after the predictor's reduction (the GAN's conditioning input).
  Matrix reduced_semantics;
  /// Class means of the seen training rows, full width.
  PrototypeTable seen_real;
  std::vector<double> errors;

  PrototypeTable predicted_table(const std::optional<std::vector<std::size_t>>& selection) const;
  Matrix semantics_of(std::span<const int> ids) const;
};

PrototypeArtifacts prototype_stage(const Dataset& data, const RunConfig& config);
/// Empty optional when selection is off.
std::optional<std::vector<std::size_t>> selection_stage(const PrototypeArtifacts& protos,
                                                        const RunConfig& config);
GanModel train_stage(const Dataset& data, const PrototypeArtifacts& protos,
                     const std::optional<std::vector<std::size_t>>& selection,
                     const RunConfig& config);
SyntheticFeatures synthesis_stage(const Dataset& data, const PrototypeArtifacts& protos,
                                  const std::optional<std::vector<std::size_t>>& selection,
                                  const GanModel& model, const RunConfig& config);

struct Evaluation {
  /// Softmax trained on synthetic features (plus real seen rows under GZSL).
  EvaluationReport report;
  /// Nearest predicted prototype, same protocol.
  EvaluationReport nn1;
};

Evaluation evaluation_stage(const Dataset& data, const PrototypeArtifacts& protos,
                            const std::optional<std::vector<std::size_t>>& selection,
                            const SyntheticFeatures& synthetic, const RunConfig& config);

struct PipelineResult {
  PrototypeArtifacts prototypes;
  std::optional<std::vector<std::size_t>> selection;
  GanModel gan;
  SyntheticFeatures synthetic;
  Evaluation evaluation;
};

PipelineResult run_pipeline(const Dataset& data, const RunConfig& config);

/// Per-stage files inside a run directory.
void save_prototype_artifacts(const std::filesystem::path& dir, const PrototypeArtifacts& p);
PrototypeArtifacts load_prototype_artifacts(const std::filesystem::path& dir);
void save_selection(const std::filesystem::path& dir,
                    const std::optional<std::vector<std::size_t>>& selection);
std::optional<std::vector<std::size_t>> load_selection(const std::filesystem::path& dir);
void save_synthetic(const std::filesystem::path& dir, const SyntheticFeatures& s);
SyntheticFeatures load_synthetic(const std::filesystem::path& dir);

}  // namespace afr
