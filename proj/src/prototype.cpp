// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "afr/prototype.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "afr/errors.hpp"

namespace afr {

std::size_t PrototypeTable::row_of(int class_id) const {
  // Tables built by subset() need not be sorted.
  auto it = std::find(class_ids.begin(), class_ids.end(), class_id);
  if (it == class_ids.end()) throw DataError("no prototype for class " + std::to_string(class_id));
  return static_cast<std::size_t>(it - class_ids.begin());
}

bool PrototypeTable::contains(int class_id) const {
  return std::find(class_ids.begin(), class_ids.end(), class_id) != class_ids.end();
}

Matrix PrototypeTable::compact() const {
  return selection ? apply_selection(prototypes, *selection) : prototypes;
}

PrototypeTable PrototypeTable::subset(std::span<const int> ids) const {
  PrototypeTable out;
  out.class_ids.assign(ids.begin(), ids.end());
  std::vector<std::size_t> rows;
  for (int id : ids) rows.push_back(row_of(id));
  out.prototypes = gather_rows(prototypes, rows);
  out.selection = selection;
  return out;
}

void PrototypeTable::validate() const {
  if (class_ids.size() != prototypes.rows()) {
    throw DimensionError("prototype table has " + std::to_string(class_ids.size()) +
                         " class ids for " + std::to_string(prototypes.rows()) + " rows");
  }
  if (std::set<int>(class_ids.begin(), class_ids.end()).size() != class_ids.size()) {
    throw DataError("prototype table has duplicate class ids");
  }
  if (selection) {
    std::set<std::size_t> seen;
    for (std::size_t j : *selection) {
      if (j >= prototypes.cols() || !seen.insert(j).second) {
        throw DataError("invalid selected dimension " + std::to_string(j) + " for width " +
                        std::to_string(prototypes.cols()));
      }
    }
  }
}

PrototypeTable compute_prototypes(const Matrix& features, std::span<const int> labels,
                                  std::optional<std::span<const int>> classes) {
  if (labels.size() != features.rows()) {
    throw DimensionError("compute_prototypes: " + std::to_string(labels.size()) +
                         " labels for features " + features.shape());
  }
  std::map<int, std::pair<std::vector<double>, std::size_t>> acc;
  if (classes) {
    for (int c : *classes) acc[c] = {std::vector<double>(features.cols(), 0.0), 0};
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = acc.find(labels[i]);
    if (it == acc.end()) {
      if (classes) continue;
      it = acc.emplace(labels[i], std::make_pair(std::vector<double>(features.cols(), 0.0), 0))
               .first;
    }
    auto& [total, count] = it->second;
    for (std::size_t j = 0; j < features.cols(); ++j) total[j] += features(i, j);
    ++count;
  }
  PrototypeTable table;
  table.prototypes = Matrix(acc.size(), features.cols());
  std::size_t r = 0;
  for (const auto& [id, entry] : acc) {
    const auto& [total, count] = entry;
    if (count == 0) throw DataError("class " + std::to_string(id) + " has no samples");
    table.class_ids.push_back(id);
    for (std::size_t j = 0; j < features.cols(); ++j)
      table.prototypes(r, j) = total[j] / static_cast<double>(count);
    ++r;
  }
  return table;
}

Matrix PredictorBank::reduce(const Matrix& semantics) const {
  return pca ? pca_transform(*pca, semantics) : semantics;
}

PredictorBank fit_prototype_predictor(const PrototypeTable& prototypes, const Matrix& semantics,
                                      const PredictorConfig& config) {
  const std::size_t classes = prototypes.prototypes.rows();
  if (semantics.rows() != classes) {
    throw DimensionError("fit_prototype_predictor: " + std::to_string(semantics.rows()) +
                         " semantic rows for " + std::to_string(classes) + " prototypes");
  }
  PredictorBank bank;
  if (config.use_pca) {
    const std::size_t fallback = std::min(semantics.cols(), classes > 0 ? classes - 1 : 0);
    bank.pca = pca_fit(semantics, config.pca_dim.value_or(fallback));
  }
  const Matrix inputs = bank.reduce(semantics);

  SvrParams params;
  params.alpha = config.alpha;
  params.delta = config.delta;
  params.tolerance = config.tolerance;
  params.max_iterations = config.max_iterations;
  params.fit_bias = config.fit_bias;
  if (config.gamma) {
    params.gamma = *config.gamma;
  } else {
    // Mean per-column variance of the regressor inputs.
    double total_variance = 0.0;
    for (std::size_t j = 0; j < inputs.cols(); ++j) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < inputs.rows(); ++i) mean += inputs(i, j);
      mean /= static_cast<double>(inputs.rows());
      for (std::size_t i = 0; i < inputs.rows(); ++i) sq += (inputs(i, j) - mean) * (inputs(i, j) - mean);
      total_variance += sq / static_cast<double>(inputs.rows() - 1);
    }
    const double dim = static_cast<double>(inputs.cols());
    const double mean_variance = total_variance / dim;
    params.gamma = mean_variance > 0.0 ? 1.0 / (dim * mean_variance) : 1.0 / dim;
  }

  const std::size_t v = prototypes.prototypes.cols();
  bank.models.resize(v);
  bank.errors.resize(v);
  std::vector<std::exception_ptr> failures(v);

  auto fit_range = [&](std::size_t begin, std::size_t end) {
    std::vector<double> targets(classes);
    for (std::size_t j = begin; j < end; ++j) {
      try {
        for (std::size_t c = 0; c < classes; ++c) targets[c] = prototypes.prototypes(c, j);
        bank.models[j] = svr_fit(inputs, targets, params);
        double err = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
          const double diff = svr_predict(bank.models[j], inputs.row(c)) - targets[c];
          err += diff * diff;
        }
        bank.errors[j] = err;
      } catch (const SolverError& e) {
        failures[j] = std::make_exception_ptr(
            SolverError("dimension " + std::to_string(j) + ": " + e.what(), e.residual()));
      } catch (...) {
        failures[j] = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(config.threads, 1, std::max<std::size_t>(v, 1));
  if (workers == 1) {
    fit_range(0, v);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (v + workers - 1) / workers;
    for (std::size_t begin = 0; begin < v; begin += chunk)
      pool.emplace_back(fit_range, begin, std::min(v, begin + chunk));
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return bank;
}

PrototypeTable predict_prototypes(const PredictorBank& bank, const Matrix& semantics,
                                  std::vector<int> class_ids) {
  if (class_ids.size() != semantics.rows()) {
    throw DimensionError("predict_prototypes: " + std::to_string(class_ids.size()) +
                         " class ids for " + std::to_string(semantics.rows()) + " semantic rows");
  }
  const Matrix inputs = bank.reduce(semantics);
  PrototypeTable table;
  table.class_ids = std::move(class_ids);
  table.prototypes = Matrix(inputs.rows(), bank.visual_dim());
  for (std::size_t c = 0; c < inputs.rows(); ++c)
    for (std::size_t j = 0; j < bank.visual_dim(); ++j)
      table.prototypes(c, j) = svr_predict(bank.models[j], inputs.row(c));
  return table;
}

std::vector<std::size_t> rank_dimensions(std::span<const double> errors) {
  std::vector<std::size_t> order(errors.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return errors[a] < errors[b]; });
  return order;
}

std::size_t default_selection_size(std::size_t visual_dim) {
  return std::max<std::size_t>(1, visual_dim / 2);
}

std::vector<std::size_t> select_features(std::span<const double> errors,
                                         std::optional<std::size_t> k) {
  const std::size_t v = errors.size();
  const std::size_t keep = k.value_or(default_selection_size(v));
  if (keep < 1 || keep > v) {
    throw ContractError("selection size " + std::to_string(keep) + " outside [1, " +
                        std::to_string(v) + "]");
  }
  std::vector<std::size_t> order = rank_dimensions(errors);
  order.resize(keep);
  return order;
}

std::vector<std::size_t> select_features(const PredictorBank& bank, std::optional<std::size_t> k) {
  return select_features(std::span<const double>(bank.errors), k);
}

Matrix apply_selection(const Matrix& matrix, std::span<const std::size_t> indices) {
  Matrix out(matrix.rows(), indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= matrix.cols()) {
      throw DimensionError("selected index " + std::to_string(indices[k]) + " out of range for " +
                           matrix.shape());
    }
  }
  for (std::size_t i = 0; i < matrix.rows(); ++i)
    for (std::size_t k = 0; k < indices.size(); ++k) out(i, k) = matrix(i, indices[k]);
  return out;
}

}  // namespace afr
