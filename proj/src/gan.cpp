// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "afr/gan.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "afr/autodiff.hpp"
#include "afr/errors.hpp"
#include "afr/serialization.hpp"

namespace afr {

namespace {

void require_finite(double value, const char* what, std::size_t iteration) {
  if (!std::isfinite(value)) {
    throw TrainingError(std::string(what) + " is not finite", iteration);
  }
}

}  // namespace

const char* to_string(GanMode mode) {
  return mode == GanMode::kBaseline ? "baseline" : "residual";
}

GanMode parse_gan_mode(const std::string& name) {
  if (name == "baseline") return GanMode::kBaseline;
  if (name == "residual") return GanMode::kResidual;
  throw ContractError("unknown gan mode '" + name + "' (expected baseline or residual)");
}

void GanConfig::validate() const {
  if (!(lambda >= 0.0)) throw ContractError("gan lambda must be >= 0");
  if (critic_steps < 1) throw ContractError("gan critic_steps must be >= 1");
  if (hidden_units < 1) throw ContractError("gan hidden_units must be >= 1");
  if (batch_size < 1) throw ContractError("gan batch_size must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw ContractError("gan learning rate must be > 0");
}

GanModel GanModel::initialize(const GanConfig& config, std::size_t feature_dim,
                              std::size_t semantic_dim, Rng& rng) {
  config.validate();
  if (feature_dim == 0 || semantic_dim == 0) {
    throw DimensionError("gan needs non-empty feature and semantic dimensions");
  }
  GanModel m;
  m.config = config;
  m.feature_dim = feature_dim;
  m.semantic_dim = semantic_dim;
  m.generator = MlpParams::glorot(m.noise_dim() + semantic_dim, config.hidden_units, feature_dim,
                                  rng);
  m.critic = MlpParams::glorot(feature_dim + semantic_dim, config.hidden_units, 1, rng);
  m.generator_state = AdamState::for_mlp(config.adam, m.generator);
  m.critic_state = AdamState::for_mlp(config.adam, m.critic);
  return m;
}

Matrix sample_noise(std::size_t n, std::size_t dim, Rng& rng) {
  if (n == 0 || dim == 0) throw ContractError("sample_noise needs n >= 1 and dim >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, dim);
  for (double& v : z.data()) v = normal(rng);
  return z;
}

Matrix generate_residuals(const GanModel& model, const Matrix& z, const Matrix& semantics) {
  if (z.rows() != semantics.rows()) {
    throw DimensionError("noise " + z.shape() + " and semantics " + semantics.shape() +
                         " rows differ");
  }
  return mlp_forward(model.generator, concat_cols(z, semantics));
}

Matrix synthesize_features(const Matrix& residuals, const Matrix& prototypes_by_row) {
  require_same_shape(residuals, prototypes_by_row, "synthesize_features");
  return add(residuals, prototypes_by_row);
}

Matrix interpolate(const Matrix& real, const Matrix& synth, std::span<const double> zetas) {
  require_same_shape(real, synth, "interpolate");
  if (zetas.size() != real.rows()) {
    throw DimensionError("interpolate needs one zeta per row");
  }
  Matrix out(real.rows(), real.cols());
  for (std::size_t i = 0; i < real.rows(); ++i) {
    const double t = zetas[i];
    for (std::size_t j = 0; j < real.cols(); ++j) {
      out(i, j) = t * real(i, j) + (1.0 - t) * synth(i, j);
    }
  }
  return out;
}

Matrix interpolate(const Matrix& real, const Matrix& synth, Rng& rng) {
  require_same_shape(real, synth, "interpolate");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> zetas(real.rows());
  for (double& t : zetas) t = unit(rng);
  return interpolate(real, synth, zetas);
}

CriticResult critic_objective(const MlpParams& critic, const Matrix& x_real, const Matrix& x_synth,
                              const Matrix& x_bar, const Matrix& semantics, double lambda,
                              std::size_t iteration) {
  require_same_shape(x_real, x_synth, "critic batch");
  require_same_shape(x_real, x_bar, "critic interpolates");
  if (semantics.rows() != x_real.rows()) {
    throw DimensionError("critic semantics " + semantics.shape() + " do not align with batch " +
                         x_real.shape());
  }
  Tape tape;
  const MlpVars vars = bind(tape, critic, true);
  const Var e = tape.constant(semantics);
  const Var real = mlp_forward(tape, vars, tape.concat_cols(tape.constant(x_real), e)).output;
  const Var fake = mlp_forward(tape, vars, tape.concat_cols(tape.constant(x_synth), e)).output;
  const Var gap = tape.sub(tape.mean(real), tape.mean(fake));
  const Var penalty = gradient_penalty(tape, vars, tape.constant(x_bar), e, lambda);
  const Var loss = tape.add(tape.scale(gap, -1.0), penalty);

  CriticResult r;
  r.loss = tape.value(loss)(0, 0);
  require_finite(r.loss, "critic loss", iteration);
  r.objective = -r.loss;
  r.wasserstein = tape.value(gap)(0, 0);
  r.penalty = tape.value(penalty)(0, 0);
  r.zero_norm_rows = tape.zero_norm_rows();
  r.grads = gradients_of(tape.backward(loss), vars);
  return r;
}

GeneratorResult generator_objective(const GanModel& model, const Matrix& z,
                                    const Matrix& semantics, const Matrix& anchors,
                                    std::size_t iteration) {
  if (z.rows() != semantics.rows()) {
    throw DimensionError("noise " + z.shape() + " and semantics " + semantics.shape() +
                         " rows differ");
  }
  Tape tape;
  const MlpVars g = bind(tape, model.generator, true);
  const MlpVars d = bind(tape, model.critic, false);
  const Var e = tape.constant(semantics);
  Var x = mlp_forward(tape, g, tape.concat_cols(tape.constant(z), e)).output;
  if (model.config.mode == GanMode::kResidual) {
    require_same_shape(tape.value(x), anchors, "generator anchors");
    x = tape.add(x, tape.constant(anchors));
  }
  const Var score = mlp_forward(tape, d, tape.concat_cols(x, e)).output;
  const Var value = tape.scale(tape.mean(score), -1.0);

  GeneratorResult r;
  r.value = tape.value(value)(0, 0);
  require_finite(r.value, "generator loss", iteration);
  r.grads = gradients_of(tape.backward(value), g);
  return r;
}

GanModel train(const ConditionalSamples& data, const PrototypeTable* anchors,
               const GanConfig& config) {
  config.validate();
  const std::size_t n = data.features.rows();
  if (n == 0) throw DataError("gan training set is empty");
  if (data.labels.size() != n) {
    throw DimensionError("gan training labels (" + std::to_string(data.labels.size()) +
                         ") do not match feature rows (" + std::to_string(n) + ")");
  }
  if (data.class_semantics.rows() != data.class_ids.size()) {
    throw DimensionError("gan class semantics have " +
                         std::to_string(data.class_semantics.rows()) + " rows for " +
                         std::to_string(data.class_ids.size()) + " classes");
  }
  const bool residual = config.mode == GanMode::kResidual;
  if (residual && anchors == nullptr) {
    throw ContractError("residual gan training requires a prototype table");
  }

  // Per-sample row indices into the class-level tables.
  std::vector<std::size_t> semantic_row(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = std::find(data.class_ids.begin(), data.class_ids.end(), data.labels[i]);
    if (it == data.class_ids.end()) {
      throw DataError("class " + std::to_string(data.labels[i]) + " has no semantic vector");
    }
    semantic_row[i] = static_cast<std::size_t>(it - data.class_ids.begin());
  }
  Matrix anchor_table;
  std::vector<std::size_t> anchor_row(n);
  if (residual) {
    anchor_table = anchors->compact();
    if (anchor_table.cols() != data.features.cols()) {
      throw DimensionError("prototype width " + std::to_string(anchor_table.cols()) +
                           " does not match feature width " +
                           std::to_string(data.features.cols()));
    }
    for (std::size_t i = 0; i < n; ++i) anchor_row[i] = anchors->row_of(data.labels[i]);
  }

  Rng rng(config.seed);
  GanModel model =
      GanModel::initialize(config, data.features.cols(), data.class_semantics.cols(), rng);
  const std::size_t batch = config.batch_size;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> rows(batch), sem(batch), anc(batch);

  auto draw_batch = [&] {
    for (std::size_t b = 0; b < batch; ++b) {
      rows[b] = pick(rng);
      sem[b] = semantic_row[rows[b]];
      anc[b] = anchor_row[rows[b]];
    }
  };

  for (std::size_t it = 0; it < config.iterations; ++it) {
    CriticResult critic;
    for (std::size_t k = 0; k < config.critic_steps; ++k) {
      draw_batch();
      const Matrix x_real = gather_rows(data.features, rows);
      const Matrix e = gather_rows(data.class_semantics, sem);
      const Matrix z = sample_noise(batch, model.noise_dim(), rng);
      Matrix x_fake = generate_residuals(model, z, e);
      if (residual) x_fake = synthesize_features(x_fake, gather_rows(anchor_table, anc));
      const Matrix x_bar = interpolate(x_real, x_fake, rng);
      critic = critic_objective(model.critic, x_real, x_fake, x_bar, e, config.lambda, it);
      adam_step(model.critic, critic.grads, model.critic_state);
    }
    draw_batch();
    const Matrix e = gather_rows(data.class_semantics, sem);
    const Matrix z = sample_noise(batch, model.noise_dim(), rng);
    const Matrix p = residual ? gather_rows(anchor_table, anc) : Matrix();
    const GeneratorResult gen = generator_objective(model, z, e, p, it);
    adam_step(model.generator, gen.grads, model.generator_state);
    model.history.push_back({critic.loss, gen.value, critic.wasserstein, critic.penalty});
    model.iteration = it + 1;
  }
  return model;
}

SyntheticFeatures synthesize_dataset(const GanModel& model, const Matrix& class_semantics,
                                     std::span<const int> class_ids, const PrototypeTable* anchors,
                                     std::size_t per_class_count, Rng& rng) {
  if (per_class_count == 0) throw ContractError("per_class_count must be >= 1");
  if (class_semantics.rows() != class_ids.size()) {
    throw DimensionError("synthesis semantics have " + std::to_string(class_semantics.rows()) +
                         " rows for " + std::to_string(class_ids.size()) + " classes");
  }
  const bool residual = model.config.mode == GanMode::kResidual;
  if (residual && anchors == nullptr) {
    throw ContractError("residual synthesis requires a prototype table");
  }
  Matrix anchor_table = residual ? anchors->compact() : Matrix();
  if (residual && anchor_table.cols() != model.feature_dim) {
    throw DimensionError("prototype width " + std::to_string(anchor_table.cols()) +
                         " does not match generator output " + std::to_string(model.feature_dim));
  }

  const std::size_t total = per_class_count * class_ids.size();
  SyntheticFeatures out;
  out.features = Matrix(total, model.feature_dim);
  out.residuals = Matrix(total, model.feature_dim);
  out.labels.reserve(total);
  for (std::size_t c = 0; c < class_ids.size(); ++c) {
    const std::size_t anchor = residual ? anchors->row_of(class_ids[c]) : 0;
    const Matrix z = sample_noise(per_class_count, model.noise_dim(), rng);
    std::vector<std::size_t> same(per_class_count, c);
    const Matrix r = generate_residuals(model, z, gather_rows(class_semantics, same));
    for (std::size_t i = 0; i < per_class_count; ++i) {
      const std::size_t row = c * per_class_count + i;
      for (std::size_t j = 0; j < model.feature_dim; ++j) {
        out.residuals(row, j) = r(i, j);
        out.features(row, j) = residual ? r(i, j) + anchor_table(anchor, j) : r(i, j);
      }
      out.labels.push_back(class_ids[c]);
    }
  }
  return out;
}

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

constexpr char kMagic[4] = {'A', 'F', 'R', 'G'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& in, const std::string& source) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw DataError(source + ": truncated checkpoint");
  }
  return v;
}

void put_params(std::ostream& out, const MlpParams& p) {
  for (const Matrix* m : p.tensors()) {
    put<std::uint64_t>(out, m->rows());
    put<std::uint64_t>(out, m->cols());
    out.write(reinterpret_cast<const char*>(m->data().data()),
              static_cast<std::streamsize>(m->size() * sizeof(double)));
  }
}

void take_params(std::istream& in, MlpParams& p, const std::string& source) {
  for (Matrix* m : p.tensors()) {
    const auto rows = take<std::uint64_t>(in, source);
    const auto cols = take<std::uint64_t>(in, source);
    if (rows != m->rows() || cols != m->cols()) {
      throw DataError(source + ": checkpoint matrix is " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", expected " + m->shape());
    }
    if (!in.read(reinterpret_cast<char*>(m->data().data()),
                 static_cast<std::streamsize>(m->size() * sizeof(double)))) {
      throw DataError(source + ": truncated checkpoint");
    }
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const GanModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  nlohmann::json echo = {{"config", model.config},
                         {"feature_dim", model.feature_dim},
                         {"semantic_dim", model.semantic_dim},
                         {"iteration", model.iteration}};
  const std::string text = echo.dump();
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_params(out, model.generator);
  put_params(out, model.critic);
  if (!out) throw DataError(path.string() + ": write failed");
}

GanModel load_checkpoint(const std::filesystem::path& path) {
  const std::string source = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(source + ": cannot open checkpoint");
  char magic[4];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DataError(source + ": not a gan checkpoint (bad magic)");
  }
  const auto version = take<std::uint32_t>(in, source);
  if (version != kCheckpointVersion) {
    throw DataError(source + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto length = take<std::uint64_t>(in, source);
  if (length > (std::uint64_t{1} << 24)) throw DataError(source + ": config echo too large");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
    throw DataError(source + ": truncated checkpoint");
  }
  GanModel model;
  try {
    const auto echo = nlohmann::json::parse(text);
    model.config = echo.at("config").get<GanConfig>();
    model.feature_dim = echo.at("feature_dim").get<std::size_t>();
    model.semantic_dim = echo.at("semantic_dim").get<std::size_t>();
    model.iteration = echo.at("iteration").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": bad config echo: " + e.what());
  }
  model.config.validate();
  const std::size_t h = model.config.hidden_units;
  model.generator = MlpParams::zeros(model.noise_dim() + model.semantic_dim, h, model.feature_dim);
  model.critic = MlpParams::zeros(model.feature_dim + model.semantic_dim, h, 1);
  take_params(in, model.generator, source);
  take_params(in, model.critic, source);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(source + ": trailing bytes after checkpoint");
  }
  // Optimizer state is not persisted; a loaded model restarts its moments.
  model.generator_state = AdamState::for_mlp(model.config.adam, model.generator);
  model.critic_state = AdamState::for_mlp(model.config.adam, model.critic);
  return model;
}

}  // namespace afr
