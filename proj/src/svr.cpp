// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "afr/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "afr/errors.hpp"

namespace afr {

namespace {

constexpr double kTau = 1e-12;

Matrix kernel_matrix(const Matrix& x, double gamma) {
  Matrix k(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = i; j < x.rows(); ++j) k(i, j) = k(j, i) = rbf_kernel(x.row(i), x.row(j), gamma);
  return k;
}

// The dual is posed over 2C variables a = (a_1..a_C, a*_1..a*_C) with labels
// y = (+1.., -1..), Q_ts = y_t y_s K and linear term p, minimizing
// 1/2 a^T Q a + p^T a over the box [0, cap] (and y^T a = 0 when fitting a bias).
struct Dual {
  std::size_t l;
  const Matrix& k;
  double cap;
  std::vector<double> a, grad;

  double sign(std::size_t t) const { return t < l ? 1.0 : -1.0; }
  double q(std::size_t t, std::size_t s) const { return sign(t) * sign(s) * k(t % l, s % l); }
  bool at_upper(std::size_t t) const { return a[t] >= cap; }
  bool at_lower(std::size_t t) const { return a[t] <= 0.0; }

  void move(std::size_t t, double old_value) {
    const double d = a[t] - old_value;
    if (d == 0.0) return;
    for (std::size_t s = 0; s < 2 * l; ++s) grad[s] += q(s, t) * d;
  }
};

// Pair selection with second-order gain, as in LIBSVM. Returns the violation
// m(a) - M(a); i, j are set only when it exceeds `tol`.
double select_pair(const Dual& d, double tol, std::size_t& i, std::size_t& j) {
  const std::size_t n = 2 * d.l;
  double gmax = -std::numeric_limits<double>::infinity();
  double gmax2 = -std::numeric_limits<double>::infinity();
  std::size_t best_i = n;
  for (std::size_t t = 0; t < n; ++t) {
    if (d.sign(t) > 0 ? !d.at_upper(t) : !d.at_lower(t)) {
      const double v = -d.sign(t) * d.grad[t];
      if (v >= gmax) {
        gmax = v;
        best_i = t;
      }
    }
  }
  std::size_t best_j = n;
  double best_gain = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    if (d.sign(t) > 0 ? d.at_lower(t) : d.at_upper(t)) continue;
    const double v = d.sign(t) * d.grad[t];  // -(-y G)
    gmax2 = std::max(gmax2, v);
    if (best_i == n) continue;
    const double diff = gmax + v;
    if (diff > 0.0) {
      double quad = d.k(best_i % d.l, best_i % d.l) + d.k(t % d.l, t % d.l) -
                    2.0 * d.k(best_i % d.l, t % d.l);
      if (quad <= 0.0) quad = kTau;
      const double gain = -(diff * diff) / quad;
      if (gain <= best_gain) {
        best_gain = gain;
        best_j = t;
      }
    }
  }
  const double violation = std::max(0.0, gmax + gmax2);
  if (violation > tol && best_i < n && best_j < n) {
    i = best_i;
    j = best_j;
  }
  return violation;
}

void update_pair(Dual& d, std::size_t i, std::size_t j) {
  const double c = d.cap;
  const double old_i = d.a[i], old_j = d.a[j];
  double& ai = d.a[i];
  double& aj = d.a[j];
  const double qij = d.q(i, j);
  if (d.sign(i) != d.sign(j)) {
    double quad = d.q(i, i) + d.q(j, j) + 2.0 * qij;
    if (quad <= 0.0) quad = kTau;
    const double step = (-d.grad[i] - d.grad[j]) / quad;
    const double diff = ai - aj;
    ai += step;
    aj += step;
    if (diff > 0.0) {
      if (aj < 0.0) { aj = 0.0; ai = diff; }
    } else {
      if (ai < 0.0) { ai = 0.0; aj = -diff; }
    }
    if (diff > 0.0) {
      if (ai > c) { ai = c; aj = c - diff; }
    } else {
      if (aj > c) { aj = c; ai = c + diff; }
    }
  } else {
    double quad = d.q(i, i) + d.q(j, j) - 2.0 * qij;
    if (quad <= 0.0) quad = kTau;
    const double step = (d.grad[i] - d.grad[j]) / quad;
    const double total = ai + aj;
    ai -= step;
    aj += step;
    if (total > c) {
      if (ai > c) { ai = c; aj = total - c; }
    } else {
      if (aj < 0.0) { aj = 0.0; ai = total; }
    }
    if (total > c) {
      if (aj > c) { aj = c; ai = total - c; }
    } else {
      if (ai < 0.0) { ai = 0.0; aj = total; }
    }
  }
  d.move(i, old_i);
  d.move(j, old_j);
}

double solve_bias(const Dual& d) {
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < 2 * d.l; ++t) {
    const double yg = d.sign(t) * d.grad[t];
    if (d.at_upper(t)) {
      if (d.sign(t) < 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (d.at_lower(t)) {
      if (d.sign(t) > 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                    : 0.5 * (upper + lower);
  return -rho;
}

// Largest projected-gradient magnitude over the box alone.
double box_violation(const Dual& d, std::size_t& worst) {
  double v = 0.0;
  for (std::size_t t = 0; t < 2 * d.l; ++t) {
    double pg = 0.0;
    if (d.grad[t] < 0.0 && !d.at_upper(t)) pg = -d.grad[t];
    if (d.grad[t] > 0.0 && !d.at_lower(t)) pg = d.grad[t];
    if (pg > v) {
      v = pg;
      worst = t;
    }
  }
  return v;
}

}  // namespace

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  if (gamma < 0.0) throw ContractError("rbf kernel width must be >= 0");
  return std::exp(-gamma * squared_distance(a, b));
}

SvrModel svr_fit(const Matrix& inputs, std::span<const double> targets, const SvrParams& params) {
  const std::size_t l = inputs.rows();
  if (l < 2) throw ContractError("svr_fit needs at least 2 training rows, got " + std::to_string(l));
  if (targets.size() != l) {
    throw DimensionError("svr_fit: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(l) + " rows");
  }
  if (!(params.alpha > 0.0)) throw ContractError("svr penalty alpha must be > 0");
  if (!(params.delta >= 0.0)) throw ContractError("svr margin delta must be >= 0");

  const Matrix k = kernel_matrix(inputs, params.gamma);
  Dual d{l, k, params.alpha / static_cast<double>(l), std::vector<double>(2 * l, 0.0),
         std::vector<double>(2 * l)};
  for (std::size_t c = 0; c < l; ++c) {
    d.grad[c] = params.delta - targets[c];
    d.grad[c + l] = params.delta + targets[c];
  }

  SvrModel model;
  double violation = 0.0;
  std::size_t it = 0;
  for (;; ++it) {
    if (params.fit_bias) {
      std::size_t i = 0, j = 0;
      violation = select_pair(d, params.tolerance, i, j);
      if (violation <= params.tolerance) break;
      if (it == params.max_iterations) break;
      update_pair(d, i, j);
    } else {
      std::size_t t = 0;
      violation = box_violation(d, t);
      if (violation <= params.tolerance) break;
      if (it == params.max_iterations) break;
      const double old = d.a[t];
      d.a[t] = std::clamp(old - d.grad[t] / std::max(d.q(t, t), kTau), 0.0, d.cap);
      d.move(t, old);
    }
  }
  if (violation > params.tolerance) {
    throw SolverError("svr did not converge in " + std::to_string(params.max_iterations) +
                          " iterations, KKT residual " + std::to_string(violation),
                      violation);
  }

  model.inputs = inputs;
  model.coefficients.resize(l);
  for (std::size_t c = 0; c < l; ++c) model.coefficients[c] = d.a[c] - d.a[c + l];
  model.bias = params.fit_bias ? solve_bias(d) : 0.0;
  model.gamma = params.gamma;
  model.delta = params.delta;
  model.alpha = params.alpha;
  model.kkt_violation = violation;
  model.iterations = it;
  return model;
}

double svr_predict(const SvrModel& model, std::span<const double> e) {
  if (e.size() != model.inputs.cols()) {
    throw DimensionError("svr_predict: input of length " + std::to_string(e.size()) +
                         ", model expects " + std::to_string(model.inputs.cols()));
  }
  double f = model.bias;
  for (std::size_t c = 0; c < model.coefficients.size(); ++c) {
    if (model.coefficients[c] != 0.0)
      f += model.coefficients[c] * rbf_kernel(model.inputs.row(c), e, model.gamma);
  }
  return f;
}

double svr_dual_objective(const Matrix& inputs, std::span<const double> targets,
                          std::span<const double> coefficients, double delta, double gamma) {
  const Matrix k = kernel_matrix(inputs, gamma);
  double value = 0.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    value += targets[i] * coefficients[i] - delta * std::abs(coefficients[i]);
    for (std::size_t j = 0; j < coefficients.size(); ++j)
      value -= 0.5 * coefficients[i] * coefficients[j] * k(i, j);
  }
  return value;
}

}  // namespace afr
