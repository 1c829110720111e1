// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "afr/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <string>

#include "afr/adam.hpp"
#include "afr/errors.hpp"

namespace afr {

namespace {

// Rows of the model that the candidate ids refer to, in candidate order.
std::vector<std::size_t> candidate_rows(std::span<const int> ids, std::span<const int> candidates) {
  std::vector<std::size_t> rows;
  if (candidates.empty()) {
    rows.resize(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) rows[k] = k;
    return rows;
  }
  rows.reserve(candidates.size());
  for (int c : candidates) {
    const auto it = std::find(ids.begin(), ids.end(), c);
    if (it == ids.end()) throw DataError("class " + std::to_string(c) + " is not a known class");
    rows.push_back(static_cast<std::size_t>(it - ids.begin()));
  }
  return rows;
}

// Picks the best row by `better(score_a, score_b)`; equal scores go to the lower id.
template <typename Better>
int pick(std::span<const int> ids, std::span<const std::size_t> rows,
         const std::function<double(std::size_t)>& score, Better better) {
  std::size_t best = rows.front();
  double best_score = score(best);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double s = score(rows[k]);
    if (better(s, best_score) || (s == best_score && ids[rows[k]] < ids[best])) {
      best = rows[k];
      best_score = s;
    }
  }
  return ids[best];
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void require_test_rows(const TestSplit& split, const char* name) {
  if (split.features.rows() == 0) throw DataError(std::string(name) + " test split is empty");
  if (split.labels.size() != split.features.rows()) {
    throw DimensionError(std::string(name) + " test split has " +
                         std::to_string(split.labels.size()) + " labels for " +
                         std::to_string(split.features.rows()) + " rows");
  }
}

using Predictor = std::function<std::vector<int>(const Matrix&, std::span<const int>)>;

EvaluationReport zsl(const Predictor& predict, const TestSplit& unseen,
                     std::span<const int> unseen_classes) {
  require_test_rows(unseen, "unseen");
  EvaluationReport r;
  const std::vector<int> pred = predict(unseen.features, unseen_classes);
  r.u_acc = per_class_top1(pred, unseen.labels, unseen_classes, &r.per_class);
  return r;
}

EvaluationReport gzsl(const Predictor& predict, const TestSplit& seen, const TestSplit& unseen,
                      std::span<const int> seen_classes, std::span<const int> unseen_classes) {
  require_test_rows(seen, "seen");
  require_test_rows(unseen, "unseen");
  std::vector<int> all(seen_classes.begin(), seen_classes.end());
  all.insert(all.end(), unseen_classes.begin(), unseen_classes.end());
  EvaluationReport r;
  r.u_acc = per_class_top1(predict(unseen.features, all), unseen.labels, unseen_classes,
                           &r.per_class);
  r.s_acc = per_class_top1(predict(seen.features, all), seen.labels, seen_classes, &r.per_class);
  r.h_mean = harmonic_mean(*r.u_acc, *r.s_acc);
  return r;
}

}  // namespace

void SoftmaxModel::validate() const {
  if (weights.rows() != class_ids.size()) {
    throw DimensionError("softmax weights " + weights.shape() + " for " +
                         std::to_string(class_ids.size()) + " classes");
  }
  if (weights.cols() < 2) throw DimensionError("softmax weights need a feature and a bias column");
  if (std::set<int>(class_ids.begin(), class_ids.end()).size() != class_ids.size()) {
    throw DataError("softmax class ids are not unique");
  }
  if (!weights.all_finite()) throw TrainingError("softmax weights are not finite", iterations);
}

Matrix SoftmaxModel::scores(const Matrix& features) const {
  if (features.cols() != feature_dim()) {
    throw DimensionError("features have " + std::to_string(features.cols()) +
                         " columns, softmax model expects " + std::to_string(feature_dim()));
  }
  Matrix s(features.rows(), weights.rows());
  const std::size_t d = feature_dim();
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t k = 0; k < weights.rows(); ++k) {
      double acc = weights(k, d);
      for (std::size_t j = 0; j < d; ++j) acc += features(i, j) * weights(k, j);
      s(i, k) = acc;
    }
  }
  return s;
}

SoftmaxLoss softmax_loss(const Matrix& weights, const Matrix& features,
                         std::span<const std::size_t> targets) {
  const std::size_t n = features.rows(), d = features.cols(), classes = weights.rows();
  if (weights.cols() != d + 1) {
    throw DimensionError("softmax weights " + weights.shape() + " for " + std::to_string(d) +
                         "-dim features");
  }
  if (targets.size() != n || n == 0) throw DimensionError("softmax needs one target per row");
  SoftmaxLoss out;
  out.gradient = Matrix(classes, d + 1);
  std::vector<double> logit(classes);
  for (std::size_t i = 0; i < n; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < classes; ++k) {
      double acc = weights(k, d);
      for (std::size_t j = 0; j < d; ++j) acc += features(i, j) * weights(k, j);
      logit[k] = acc;
      top = std::max(top, acc);
    }
    double z = 0.0;
    for (double v : logit) z += std::exp(v - top);
    const double log_z = top + std::log(z);
    out.value += log_z - logit[targets[i]];
    for (std::size_t k = 0; k < classes; ++k) {
      const double coeff = std::exp(logit[k] - log_z) - (k == targets[i] ? 1.0 : 0.0);
      for (std::size_t j = 0; j < d; ++j) out.gradient(k, j) += coeff * features(i, j);
      out.gradient(k, d) += coeff;
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.value *= inv;
  for (double& g : out.gradient.data()) g *= inv;
  return out;
}

SoftmaxModel softmax_fit(const Matrix& features, std::span<const int> labels,
                         const SoftmaxConfig& config, std::span<const int> classes) {
  if (labels.size() != features.rows()) {
    throw DimensionError("softmax training has " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(features.rows()) + " rows");
  }
  const std::set<int> present(labels.begin(), labels.end());
  for (int c : classes) {
    if (!present.count(c)) {
      throw DataError("class " + std::to_string(c) + " is absent from the training data");
    }
  }
  SoftmaxModel model;
  model.class_ids.assign(present.begin(), present.end());
  if (model.class_ids.size() < 2) throw DataError("softmax training needs at least 2 classes");
  std::vector<std::size_t> targets(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    targets[i] = static_cast<std::size_t>(
        std::lower_bound(model.class_ids.begin(), model.class_ids.end(), labels[i]) -
        model.class_ids.begin());
  }
  model.weights = Matrix(model.class_ids.size(), features.cols() + 1);
  Matrix* params[] = {&model.weights};
  AdamState state(AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8}, params);
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const SoftmaxLoss loss = softmax_loss(model.weights, features, targets);
    model.final_loss = loss.value;
    double norm2 = 0.0;
    for (double g : loss.gradient.data()) norm2 += g * g;
    if (std::sqrt(norm2) <= config.gradient_tolerance) break;
    const Matrix* grads[] = {&loss.gradient};
    adam_step(params, grads, state);
    model.iterations = it + 1;
  }
  model.final_loss = softmax_loss(model.weights, features, targets).value;
  model.validate();
  return model;
}

std::vector<int> classify(const SoftmaxModel& model, const Matrix& features,
                          std::span<const int> candidates) {
  model.validate();
  const std::vector<std::size_t> rows = candidate_rows(model.class_ids, candidates);
  const Matrix s = model.scores(features);
  std::vector<int> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out[i] = pick(model.class_ids, rows, [&](std::size_t k) { return s(i, k); },
                  std::greater<double>());
  }
  return out;
}

std::vector<int> nn1_classify(const PrototypeTable& prototypes, const Matrix& features,
                              std::span<const int> candidates) {
  if (prototypes.class_ids.empty()) throw DataError("1NN needs a non-empty prototype table");
  const Matrix table = prototypes.compact();
  if (features.cols() != table.cols()) {
    throw DimensionError("features have " + std::to_string(features.cols()) +
                         " columns, prototypes have " + std::to_string(table.cols()));
  }
  const std::vector<std::size_t> rows = candidate_rows(prototypes.class_ids, candidates);
  std::vector<int> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out[i] = pick(prototypes.class_ids, rows,
                  [&](std::size_t k) { return squared_distance(features.row(i), table.row(k)); },
                  std::less<double>());
  }
  return out;
}

double per_class_top1(std::span<const int> predictions, std::span<const int> labels,
                      std::span<const int> class_set, std::map<int, double>* per_class) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("per_class_top1 has " + std::to_string(predictions.size()) +
                         " predictions for " + std::to_string(labels.size()) + " labels");
  }
  if (class_set.empty()) throw DataError("per_class_top1 needs at least one class");
  std::map<int, std::pair<std::size_t, std::size_t>> tally;  // id -> (hits, count)
  for (int c : class_set) tally[c] = {0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = tally.find(labels[i]);
    if (it == tally.end()) {
      throw DataError("test label " + std::to_string(labels[i]) + " is outside the class set");
    }
    ++it->second.second;
    if (predictions[i] == labels[i]) ++it->second.first;
  }
  double total = 0.0;
  for (const auto& [id, hc] : tally) {
    if (hc.second == 0) throw DataError("class " + std::to_string(id) + " has no test samples");
    const double acc = 100.0 * static_cast<double>(hc.first) / static_cast<double>(hc.second);
    if (per_class) (*per_class)[id] = acc;
    total += acc;
  }
  return total / static_cast<double>(tally.size());
}

double harmonic_mean(double u, double s) {
  if (!(u >= 0.0) || !(s >= 0.0)) throw ContractError("harmonic_mean needs U, S >= 0");
  return u + s == 0.0 ? 0.0 : 2.0 * u * s / (u + s);
}

ResidualStats residual_ratio(const Matrix& residuals, const Matrix& prototypes) {
  if (prototypes.rows() < 2) throw ContractError("residual_ratio needs at least 2 prototypes");
  if (residuals.rows() == 0) throw ContractError("residual_ratio needs at least 1 residual");
  if (residuals.cols() != prototypes.cols()) {
    throw DimensionError("residuals " + residuals.shape() + " vs prototypes " +
                         prototypes.shape());
  }
  std::vector<double> norms(residuals.rows());
  for (std::size_t i = 0; i < residuals.rows(); ++i) {
    double acc = 0.0;
    for (double v : residuals.row(i)) acc += v * v;
    norms[i] = std::sqrt(acc);
  }
  std::vector<double> dist;
  for (std::size_t a = 0; a < prototypes.rows(); ++a)
    for (std::size_t b = a + 1; b < prototypes.rows(); ++b)
      dist.push_back(std::sqrt(squared_distance(prototypes.row(a), prototypes.row(b))));
  ResidualStats r;
  r.median_residual_norm = median(std::move(norms));
  r.median_prototype_distance = median(std::move(dist));
  if (r.median_prototype_distance == 0.0) {
    throw ContractError("residual_ratio: median prototype distance is zero");
  }
  r.ratio = r.median_residual_norm / r.median_prototype_distance;
  return r;
}

double prototype_purity(const Matrix& features, std::span<const int> labels,
                        const PrototypeTable& prototypes) {
  if (labels.size() != features.rows() || labels.empty()) {
    throw DimensionError("prototype_purity needs one label per feature row");
  }
  const std::vector<int> nearest = nn1_classify(prototypes, features);
  std::size_t own = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) own += nearest[i] == labels[i];
  return static_cast<double>(own) / static_cast<double>(labels.size());
}

void to_json(nlohmann::json& j, const EvaluationReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [id, acc] : r.per_class) per_class[std::to_string(id)] = acc;
  nlohmann::json ratio(nullptr);
  if (r.residual_ratio) {
    ratio = {{"median_residual_norm", r.residual_ratio->median_residual_norm},
             {"median_prototype_distance", r.residual_ratio->median_prototype_distance},
             {"ratio", r.residual_ratio->ratio}};
  }
  j = {{"u_acc", opt(r.u_acc)},       {"s_acc", opt(r.s_acc)},  {"h_mean", opt(r.h_mean)},
       {"per_class", per_class},      {"purity", opt(r.purity)}, {"residual_ratio", ratio},
       {"seed", r.seed},              {"config", r.config}};
}

EvaluationReport evaluate_zsl(const SoftmaxModel& model, const TestSplit& unseen,
                              std::span<const int> unseen_classes) {
  return zsl([&](const Matrix& x, std::span<const int> c) { return classify(model, x, c); },
             unseen, unseen_classes);
}

EvaluationReport evaluate_zsl(const PrototypeTable& prototypes, const TestSplit& unseen,
                              std::span<const int> unseen_classes) {
  return zsl([&](const Matrix& x, std::span<const int> c) { return nn1_classify(prototypes, x, c); },
             unseen, unseen_classes);
}

EvaluationReport evaluate_gzsl(const SoftmaxModel& model, const TestSplit& seen,
                               const TestSplit& unseen, std::span<const int> seen_classes,
                               std::span<const int> unseen_classes) {
  return gzsl([&](const Matrix& x, std::span<const int> c) { return classify(model, x, c); }, seen,
              unseen, seen_classes, unseen_classes);
}

EvaluationReport evaluate_gzsl(const PrototypeTable& prototypes, const TestSplit& seen,
                               const TestSplit& unseen, std::span<const int> seen_classes,
                               std::span<const int> unseen_classes) {
  return gzsl(
      [&](const Matrix& x, std::span<const int> c) { return nn1_classify(prototypes, x, c); },
      seen, unseen, seen_classes, unseen_classes);
}

}  // namespace afr
