// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "afr/matrix.hpp"

namespace afr {

/// Class-level split plus held-out sample indices.
struct SplitManifest {
  std::vector<int> seen;
  std::vector<int> unseen;
  std::vector<std::size_t> test_seen;
  std::vector<std::size_t> test_unseen;

  friend bool operator==(const SplitManifest&, const SplitManifest&) = default;
};

/// Visual features (N x v), one label per row, and a semantic matrix whose
/// row k describes class id k.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  Matrix semantics;
  SplitManifest split;

  std::size_t visual_dim() const noexcept { return features.cols(); }
  std::size_t semantic_dim() const noexcept { return semantics.cols(); }
  /// Samples of seen classes that are not held out in test_seen.
  std::vector<std::size_t> train_indices() const;
  /// Semantic rows for `classes`, in the given order.
  Matrix semantics_for(std::span<const int> classes) const;
  /// Seen and unseen ids together, ascending.
  std::vector<int> all_classes() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SplitReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Checks class disjointness, label coverage, semantic rows, and test index
/// consistency. Never throws; failures are listed in the report.
SplitReport validate_split(const Dataset& dataset);

// Binary matrix file: "AFRM", u32 version, u64 rows, u64 cols, then
// rows * cols little-endian doubles in row-major order.
inline constexpr std::uint32_t kMatrixFormatVersion = 1;
void save_matrix(const std::filesystem::path& path, const Matrix& matrix);
Matrix load_matrix(const std::filesystem::path& path);

void write_matrix(std::ostream& out, const Matrix& matrix);
Matrix read_matrix(std::istream& in, const std::string& source);

void save_labels(const std::filesystem::path& path, std::span<const int> labels);
std::vector<int> load_labels(const std::filesystem::path& path);

/// Directory layout: features.afrm, labels.csv, semantics.afrm, split.json.
void save_dataset(const std::filesystem::path& directory, const Dataset& dataset);
/// Loads and validates; throws DataError with a distinct message per failure.
Dataset load_dataset(const std::filesystem::path& directory);

struct SyntheticBenchmarkConfig {
  std::size_t seen_classes = 20;
  std::size_t unseen_classes = 5;
  std::size_t samples_per_class = 60;
  /// Held-out share of each seen class's samples.
  double test_seen_fraction = 0.2;
  std::size_t visual_dim = 32;
  std::size_t semantic_dim = 16;
  /// Semantics are a random linear image of a latent code of this size.
  std::size_t latent_dim = 4;
  double semantic_noise = 0.05;
  double sigma_intra = 0.05;
  double sigma_inter = 0.5;
  /// Gain inside the tanh of consistent dimensions; larger bends the
  /// semantic-to-visual map further from linear.
  double curvature = 1.0;
  /// Share of visual dimensions whose class means ignore the semantics.
  double noise_fraction = 0.5;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SyntheticBenchmark {
  Dataset dataset;
  /// Generating class means, row k for class k.
  Matrix prototypes;
  std::vector<std::size_t> noise_dims;
};

/// Pure function of the config. Consistent dimensions are sigma_inter *
/// tanh(affine(latent)), inconsistent ones are per-class Gaussian draws of the
/// same spread, and samples add N(0, sigma_intra^2) to their class mean.
SyntheticBenchmark generate_synthetic_benchmark(const SyntheticBenchmarkConfig& config);

}  // namespace afr
