// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Dense accelerated projected-gradient solver for the epsilon-SVR dual, used
// only as an independent check on the SMO solver.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "afr/matrix.hpp"

namespace afr::testing {

struct QpSolution {
  std::vector<double> coefficients;
  double dual_objective = 0.0;
};

inline QpSolution dense_svr_dual(const Matrix& x, std::span<const double> y, double alpha,
                                 double delta, double gamma, bool with_bias = true,
                                 int iterations = 60000) {
  const std::size_t l = x.rows(), n = 2 * l;
  const double cap = alpha / static_cast<double>(l);
  std::vector<double> k(l * l);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < l; ++j) {
      double d = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) d += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
      k[i * l + j] = std::exp(-gamma * d);
    }
  auto sign = [&](std::size_t t) { return t < l ? 1.0 : -1.0; };
  auto q = [&](std::size_t t, std::size_t s) { return sign(t) * sign(s) * k[(t % l) * l + s % l]; };
  std::vector<double> p(n);
  for (std::size_t c = 0; c < l; ++c) {
    p[c] = delta - y[c];
    p[c + l] = delta + y[c];
  }
  double lipschitz = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double row = 0.0;
    for (std::size_t s = 0; s < n; ++s) row += std::abs(q(t, s));
    lipschitz = std::max(lipschitz, row);
  }
  const double step = 1.0 / lipschitz;

  auto project = [&](std::vector<double> z) {
    if (!with_bias) {
      for (double& v : z) v = std::clamp(v, 0.0, cap);
      return z;
    }
    // Find mu with sum_t y_t clip(z_t - mu y_t) = 0; the sum is non-increasing in mu.
    double lo = -1e6, hi = 1e6;
    auto residual = [&](double mu) {
      double s = 0.0;
      for (std::size_t t = 0; t < n; ++t) s += sign(t) * std::clamp(z[t] - mu * sign(t), 0.0, cap);
      return s;
    };
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (residual(mid) > 0.0 ? lo : hi) = mid;
    }
    const double mu = 0.5 * (lo + hi);
    for (std::size_t t = 0; t < n; ++t) z[t] = std::clamp(z[t] - mu * sign(t), 0.0, cap);
    return z;
  };

  std::vector<double> a(n, 0.0), prev = a, yk = a, grad(n);
  double tk = 1.0;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t t = 0; t < n; ++t) {
      double g = p[t];
      for (std::size_t s = 0; s < n; ++s) g += q(t, s) * yk[s];
      grad[t] = yk[t] - step * g;
    }
    prev = a;
    a = project(grad);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    for (std::size_t t = 0; t < n; ++t) yk[t] = a[t] + ((tk - 1.0) / tn) * (a[t] - prev[t]);
    tk = tn;
  }

  QpSolution sol;
  sol.coefficients.resize(l);
  double f = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    f += p[t] * a[t];
    for (std::size_t s = 0; s < n; ++s) f += 0.5 * a[t] * q(t, s) * a[s];
  }
  for (std::size_t c = 0; c < l; ++c) sol.coefficients[c] = a[c] - a[c + l];
  sol.dual_objective = -f;
  return sol;
}

}  // namespace afr::testing
