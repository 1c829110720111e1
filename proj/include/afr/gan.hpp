// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "afr/adam.hpp"
#include "afr/matrix.hpp"
#include "afr/mlp.hpp"
#include "afr/prototype.hpp"
#include "afr/random.hpp"

namespace afr {

enum class GanMode {
  /// The generator emits features directly.
  kBaseline,
  /// The generator emits residuals that are added to the class prototype.
  kResidual,
};

const char* to_string(GanMode mode);
GanMode parse_gan_mode(const std::string& name);

struct GanConfig {
  /// 0 means "same as the semantic dimension".
  std::size_t noise_dim = 0;
  std::size_t hidden_units = 64;
  double lambda = 10.0;
  std::size_t critic_steps = 5;
  AdamConfig adam{1e-4, 0.0, 0.9, 1e-8};
  std::size_t batch_size = 64;
  /// Generator updates.
  std::size_t iterations = 2000;
  GanMode mode = GanMode::kResidual;
  std::uint64_t seed = 1;

  void validate() const;
};

struct LossRecord {
  double critic_loss = 0.0;
  double generator_loss = 0.0;
  /// E D(real) - E D(fake) on the last critic batch.
  double wasserstein = 0.0;
  double penalty = 0.0;
};

/// Generator G(noise | semantics) and critic D(feature | semantics), both
/// three-layer MLPs conditioned by input concatenation.
struct GanModel {
  GanConfig config;
  std::size_t feature_dim = 0;
  std::size_t semantic_dim = 0;
  MlpParams generator;
  MlpParams critic;
  AdamState generator_state;
  AdamState critic_state;
  std::size_t iteration = 0;
  std::vector<LossRecord> history;

  std::size_t noise_dim() const noexcept { return config.noise_dim ? config.noise_dim : semantic_dim; }

  /// Seeded initialization; consumes the generator's weights first, then the critic's.
  static GanModel initialize(const GanConfig& config, std::size_t feature_dim,
                             std::size_t semantic_dim, Rng& rng);
};

/// n x dim standard-normal draws.
Matrix sample_noise(std::size_t n, std::size_t dim, Rng& rng);

/// G applied to the rows (z | semantics).
Matrix generate_residuals(const GanModel& model, const Matrix& z, const Matrix& semantics);

/// residuals + prototypes, element-wise.
Matrix synthesize_features(const Matrix& residuals, const Matrix& prototypes_by_row);

/// Row i is zeta_i * real_i + (1 - zeta_i) * synth_i with zeta_i ~ U(0, 1).
Matrix interpolate(const Matrix& real, const Matrix& synth, Rng& rng);
Matrix interpolate(const Matrix& real, const Matrix& synth, std::span<const double> zetas);

struct CriticResult {
  /// E D(real) - E D(synth) - lambda * penalty term; the critic maximizes this.
  double objective = 0.0;
  /// -objective; `grads` are its derivatives.
  double loss = 0.0;
  double wasserstein = 0.0;
  double penalty = 0.0;
  std::size_t zero_norm_rows = 0;
  MlpGrads grads;
};

/// Throws TrainingError tagged with `iteration` if the loss is not finite.
CriticResult critic_objective(const MlpParams& critic, const Matrix& x_real, const Matrix& x_synth,
                              const Matrix& x_bar, const Matrix& semantics, double lambda,
                              std::size_t iteration = 0);

struct GeneratorResult {
  /// -E D(G(z | e) + anchor, e).
  double value = 0.0;
  MlpGrads grads;
};

/// `anchors` holds one prototype row per batch row in residual mode and is
/// ignored (may be empty) in baseline mode.
GeneratorResult generator_objective(const GanModel& model, const Matrix& z,
                                    const Matrix& semantics, const Matrix& anchors,
                                    std::size_t iteration = 0);

/// Real training rows with their class-level conditioning.
struct ConditionalSamples {
  Matrix features;
  std::vector<int> labels;
  std::vector<int> class_ids;
  /// Row k describes class_ids[k].
  Matrix class_semantics;
};

/// Alternates config.critic_steps critic updates with one generator update,
/// config.iterations times. In residual mode `anchors` must cover every class
/// in `data`; its compact() view is used and must match the feature width.
GanModel train(const ConditionalSamples& data, const PrototypeTable* anchors,
               const GanConfig& config);

struct SyntheticFeatures {
  Matrix features;
  std::vector<int> labels;
  /// Raw generator outputs, before any prototype is added.
  Matrix residuals;
};

/// per_class_count samples for each class, in the order of `class_ids`.
/// Noise is drawn one class block at a time.
SyntheticFeatures synthesize_dataset(const GanModel& model, const Matrix& class_semantics,
                                     std::span<const int> class_ids, const PrototypeTable* anchors,
                                     std::size_t per_class_count, Rng& rng);

// Checkpoint: "AFRG", u32 version, u64 length + JSON config echo, then the six
// generator and six critic matrices as (u64 rows, u64 cols, little-endian doubles).
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const std::filesystem::path& path, const GanModel& model);
GanModel load_checkpoint(const std::filesystem::path& path);

}  // namespace afr
