// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "afr/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "afr/errors.hpp"
#include "afr/serialization.hpp"

namespace afr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Synthesis draws from its own stream so that it does not depend on how many
// numbers GAN training consumed.
constexpr std::uint64_t kSynthesisStream = 0x73796e7468657369ULL;

Matrix columns(const Matrix& m, const std::optional<std::vector<std::size_t>>& selection) {
  return selection ? apply_selection(m, *selection) : m;
}

std::vector<int> labels_at(const std::vector<int>& labels, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(labels[r]);
  return out;
}

TestSplit test_split(const Dataset& data, const std::vector<std::size_t>& rows,
                     const std::optional<std::vector<std::size_t>>& selection) {
  return {columns(gather_rows(data.features, rows), selection), labels_at(data.labels, rows)};
}

json strip_seed(json j) {
  j.erase("seed");
  return j;
}

void reject_nested_seed(const json& j, const char* key) {
  if (j.contains(key) && j.at(key).is_object() && j.at(key).contains("seed")) {
    throw ContractError(std::string("\"") + key + ".seed\" is not configurable; set top-level \"seed\"");
  }
}

}  // namespace

RunConfig RunConfig::resolved() const {
  RunConfig r = *this;
  r.benchmark.seed = seed;
  r.gan.seed = seed;
  return r;
}

void RunConfig::validate() const {
  gan.validate();
  if (per_class < 1) throw ContractError("per_class must be >= 1");
  if (!(svr.alpha > 0.0)) throw ContractError("svr alpha must be > 0");
  if (!(svr.delta >= 0.0)) throw ContractError("svr delta must be >= 0");
  if (!(classifier.learning_rate > 0.0)) throw ContractError("classifier learning rate must be > 0");
  if (k && *k == 0) throw ContractError("k must be >= 1");
}

void to_json(json& j, const RunConfig& c) {
  j = {{"seed", c.seed},
       {"benchmark", strip_seed(json(c.benchmark))},
       {"svr", c.svr},
       {"k", c.k ? json(*c.k) : json(nullptr)},
       {"selection", c.selection},
       {"gan", strip_seed(json(c.gan))},
       {"classifier", c.classifier},
       {"per_class", c.per_class},
       {"gzsl", c.gzsl},
       {"data_dir", c.data_dir},
       {"out_dir", c.out_dir}};
}

void from_json(const json& j, RunConfig& c) {
  if (!j.is_object()) throw ContractError("run config must be a JSON object");
  for (const auto& item : j.items()) {
    static const char* const kKeys[] = {"seed", "benchmark", "svr", "k", "selection", "gan",
                                        "classifier", "per_class", "gzsl", "data_dir", "out_dir"};
    if (std::find_if(std::begin(kKeys), std::end(kKeys),
                     [&](const char* k) { return item.key() == k; }) == std::end(kKeys)) {
      throw ContractError("unknown run config key '" + item.key() + "'");
    }
  }
  reject_nested_seed(j, "benchmark");
  reject_nested_seed(j, "gan");
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("benchmark")) from_json(j.at("benchmark"), c.benchmark);
  if (j.contains("svr")) from_json(j.at("svr"), c.svr);
  if (j.contains("k")) {
    c.k = j.at("k").is_null() ? std::nullopt : std::optional(j.at("k").get<std::size_t>());
  }
  if (j.contains("selection")) c.selection = j.at("selection").get<bool>();
  if (j.contains("gan")) from_json(j.at("gan"), c.gan);
  if (j.contains("classifier")) from_json(j.at("classifier"), c.classifier);
  if (j.contains("per_class")) c.per_class = j.at("per_class").get<std::size_t>();
  if (j.contains("gzsl")) c.gzsl = j.at("gzsl").get<bool>();
  if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config file not found: " + path.string());
  try {
    json j = json::parse(in);
    if (j.contains("config") && j.at("config").is_object()) j = j.at("config");
    return j.get<RunConfig>();
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

PrototypeTable PrototypeArtifacts::predicted_table(
    const std::optional<std::vector<std::size_t>>& selection) const {
  PrototypeTable t;
  t.class_ids = class_ids;
  t.prototypes = predicted;
  t.selection = selection;
  t.validate();
  return t;
}

Matrix PrototypeArtifacts::semantics_of(std::span<const int> ids) const {
  std::vector<std::size_t> rows;
  for (int id : ids) {
    const auto it = std::find(class_ids.begin(), class_ids.end(), id);
    if (it == class_ids.end()) throw DataError("class " + std::to_string(id) + " has no semantics");
    rows.push_back(static_cast<std::size_t>(it - class_ids.begin()));
  }
  return gather_rows(reduced_semantics, rows);
}

PrototypeArtifacts prototype_stage(const Dataset& data, const RunConfig& config) {
  const std::vector<std::size_t> train = data.train_indices();
  const std::vector<int>& seen = data.split.seen;
  PrototypeArtifacts out;
  out.class_ids = data.all_classes();
  out.seen_real = compute_prototypes(gather_rows(data.features, train), labels_at(data.labels, train),
                                     std::span<const int>(seen));
  const PredictorBank bank =
      fit_prototype_predictor(out.seen_real, data.semantics_for(out.seen_real.class_ids), config.svr);
  const Matrix all_semantics = data.semantics_for(out.class_ids);
  out.predicted = predict_prototypes(bank, all_semantics, out.class_ids).prototypes;
  out.reduced_semantics = bank.reduce(all_semantics);
  out.errors = bank.errors;
  return out;
}

std::optional<std::vector<std::size_t>> selection_stage(const PrototypeArtifacts& protos,
                                                        const RunConfig& config) {
  if (!config.selection) return std::nullopt;
  return select_features(protos.errors, config.k);
}

GanModel train_stage(const Dataset& data, const PrototypeArtifacts& protos,
                     const std::optional<std::vector<std::size_t>>& selection,
                     const RunConfig& config) {
  const RunConfig cfg = config.resolved();
  const std::vector<std::size_t> rows = data.train_indices();
  ConditionalSamples samples;
  samples.features = columns(gather_rows(data.features, rows), selection);
  samples.labels = labels_at(data.labels, rows);
  samples.class_ids = protos.seen_real.class_ids;
  samples.class_semantics = protos.semantics_of(samples.class_ids);
  const PrototypeTable anchors = protos.predicted_table(selection).subset(samples.class_ids);
  return afr::train(samples, &anchors, cfg.gan);
}

SyntheticFeatures synthesis_stage(const Dataset& data, const PrototypeArtifacts& protos,
                                  const std::optional<std::vector<std::size_t>>& selection,
                                  const GanModel& model, const RunConfig& config) {
  const std::vector<int>& unseen = data.split.unseen;
  const PrototypeTable anchors = protos.predicted_table(selection);
  Rng rng(config.seed ^ kSynthesisStream);
  return synthesize_dataset(model, protos.semantics_of(unseen), unseen, &anchors, config.per_class,
                            rng);
}

Evaluation evaluation_stage(const Dataset& data, const PrototypeArtifacts& protos,
                            const std::optional<std::vector<std::size_t>>& selection,
                            const SyntheticFeatures& synthetic, const RunConfig& config) {
  const std::vector<int>& seen = data.split.seen;
  const std::vector<int>& unseen = data.split.unseen;
  const TestSplit test_unseen = test_split(data, data.split.test_unseen, selection);
  const PrototypeTable table = protos.predicted_table(selection);
  const PrototypeTable unseen_table = table.subset(unseen);

  Evaluation ev;
  if (config.gzsl) {
    const std::vector<std::size_t> train = data.train_indices();
    const TestSplit real = test_split(data, train, selection);
    Matrix x(real.features.rows() + synthetic.features.rows(), real.features.cols());
    std::copy(real.features.data().begin(), real.features.data().end(), x.data().begin());
    std::copy(synthetic.features.data().begin(), synthetic.features.data().end(),
              x.data().begin() + static_cast<std::ptrdiff_t>(real.features.size()));
    std::vector<int> y = real.labels;
    y.insert(y.end(), synthetic.labels.begin(), synthetic.labels.end());
    const std::vector<int> all = data.all_classes();
    const SoftmaxModel model = softmax_fit(x, y, config.classifier, all);
    const TestSplit test_seen = test_split(data, data.split.test_seen, selection);
    ev.report = evaluate_gzsl(model, test_seen, test_unseen, seen, unseen);
    ev.nn1 = evaluate_gzsl(table, test_seen, test_unseen, seen, unseen);
  } else {
    const SoftmaxModel model =
        softmax_fit(synthetic.features, synthetic.labels, config.classifier, unseen);
    ev.report = evaluate_zsl(model, test_unseen, unseen);
    ev.nn1 = evaluate_zsl(unseen_table, test_unseen, unseen);
  }

  ev.report.purity = prototype_purity(synthetic.features, synthetic.labels, unseen_table);
  Matrix residuals = synthetic.residuals;
  if (config.gan.mode == GanMode::kBaseline) {
    const Matrix anchors = unseen_table.compact();
    for (std::size_t i = 0; i < residuals.rows(); ++i) {
      const std::size_t row = unseen_table.row_of(synthetic.labels[i]);
      for (std::size_t j = 0; j < residuals.cols(); ++j)
        residuals(i, j) = synthetic.features(i, j) - anchors(row, j);
    }
  }
  ev.report.residual_ratio = residual_ratio(residuals, table.compact());
  for (EvaluationReport* r : {&ev.report, &ev.nn1}) {
    r->seed = config.seed;
    r->config = config;
  }
  return ev;
}

PipelineResult run_pipeline(const Dataset& data, const RunConfig& config) {
  config.validate();
  PipelineResult r;
  r.prototypes = prototype_stage(data, config);
  r.selection = selection_stage(r.prototypes, config);
  r.gan = train_stage(data, r.prototypes, r.selection, config);
  r.synthetic = synthesis_stage(data, r.prototypes, r.selection, r.gan, config);
  r.evaluation = evaluation_stage(data, r.prototypes, r.selection, r.synthetic, config);
  return r;
}

void save_prototype_artifacts(const fs::path& dir, const PrototypeArtifacts& p) {
  fs::create_directories(dir);
  save_labels(dir / "prototype_classes.csv", p.class_ids);
  save_matrix(dir / "predicted_prototypes.afrm", p.predicted);
  save_matrix(dir / "reduced_semantics.afrm", p.reduced_semantics);
  save_labels(dir / "seen_classes.csv", p.seen_real.class_ids);
  save_matrix(dir / "seen_prototypes.afrm", p.seen_real.prototypes);
  save_matrix(dir / "dimension_errors.afrm", Matrix(1, p.errors.size(), p.errors));
}

PrototypeArtifacts load_prototype_artifacts(const fs::path& dir) {
  PrototypeArtifacts p;
  p.class_ids = load_labels(dir / "prototype_classes.csv");
  p.predicted = load_matrix(dir / "predicted_prototypes.afrm");
  p.reduced_semantics = load_matrix(dir / "reduced_semantics.afrm");
  p.seen_real.class_ids = load_labels(dir / "seen_classes.csv");
  p.seen_real.prototypes = load_matrix(dir / "seen_prototypes.afrm");
  const Matrix errors = load_matrix(dir / "dimension_errors.afrm");
  p.errors = errors.data();
  if (p.predicted.rows() != p.class_ids.size() || p.reduced_semantics.rows() != p.class_ids.size() ||
      errors.rows() != 1 || errors.cols() != p.predicted.cols()) {
    throw DataError(dir.string() + ": prototype artifacts have inconsistent shapes");
  }
  p.seen_real.validate();
  return p;
}

void save_selection(const fs::path& dir, const std::optional<std::vector<std::size_t>>& selection) {
  fs::create_directories(dir);
  json j = {{"enabled", selection.has_value()},
            {"indices", selection ? json(*selection) : json::array()}};
  std::ofstream out(dir / "selection.json");
  out << j.dump(2) << '\n';
  if (!out) throw DataError("cannot write " + (dir / "selection.json").string());
}

std::optional<std::vector<std::size_t>> load_selection(const fs::path& dir) {
  const fs::path path = dir / "selection.json";
  std::ifstream in(path);
  if (!in) throw DataError("missing file " + path.string());
  try {
    const json j = json::parse(in);
    if (!j.at("enabled").get<bool>()) return std::nullopt;
    return j.at("indices").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_synthetic(const fs::path& dir, const SyntheticFeatures& s) {
  fs::create_directories(dir);
  save_matrix(dir / "synthetic_features.afrm", s.features);
  save_labels(dir / "synthetic_labels.csv", s.labels);
  save_matrix(dir / "synthetic_residuals.afrm", s.residuals);
}

SyntheticFeatures load_synthetic(const fs::path& dir) {
  SyntheticFeatures s;
  s.features = load_matrix(dir / "synthetic_features.afrm");
  s.labels = load_labels(dir / "synthetic_labels.csv");
  s.residuals = load_matrix(dir / "synthetic_residuals.afrm");
  if (s.labels.size() != s.features.rows() || s.residuals.shape() != s.features.shape()) {
    throw DataError(dir.string() + ": synthetic artifacts have inconsistent shapes");
  }
  return s;
}

}  // namespace afr
