// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "afr/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "afr/errors.hpp"

namespace afr {

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance, std::size_t max_sweeps) {
  const std::size_t n = symmetric.rows();
  if (symmetric.cols() != n) throw DimensionError("jacobi_eigen: " + symmetric.shape());
  Matrix a = symmetric;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  const double threshold = tolerance * tolerance * std::max(frob, 1e-300);

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (off <= threshold) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

PcaModel pca_fit(const Matrix& samples, std::size_t target_dim) {
  const std::size_t n = samples.rows(), d = samples.cols();
  if (n < 2 || target_dim == 0 || target_dim > std::min(n - 1, d)) {
    throw DimensionError("pca target dimension " + std::to_string(target_dim) +
                         " must be in [1, min(rows - 1, cols)] for samples " + samples.shape());
  }
  PcaModel model;
  model.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += samples(i, j);
  for (double& m : model.mean) m /= static_cast<double>(n);

  Matrix centered = samples;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) centered(i, j) -= model.mean[j];
  Matrix cov = scale(matmul_tn(centered, centered), 1.0 / static_cast<double>(n - 1));

  SymmetricEigen eig = jacobi_eigen(cov);
  model.components = Matrix(target_dim, d);
  model.variances.assign(eig.values.begin(), eig.values.begin() + target_dim);
  for (std::size_t k = 0; k < target_dim; ++k) {
    std::size_t pivot = 0;
    for (std::size_t r = 1; r < d; ++r)
      if (std::abs(eig.vectors(r, k)) > std::abs(eig.vectors(pivot, k))) pivot = r;
    const double sign = eig.vectors(pivot, k) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < d; ++r) model.components(k, r) = sign * eig.vectors(r, k);
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& samples) {
  if (samples.cols() != model.input_dim()) {
    throw DimensionError("pca_transform: samples " + samples.shape() + ", model input width " +
                         std::to_string(model.input_dim()));
  }
  Matrix centered = samples;
  for (std::size_t i = 0; i < samples.rows(); ++i)
    for (std::size_t j = 0; j < samples.cols(); ++j) centered(i, j) -= model.mean[j];
  return matmul_nt(centered, model.components);
}

}  // namespace afr
