// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "afr/adam.hpp"

#include <cmath>

#include "afr/errors.hpp"

namespace afr {

AdamState::AdamState(AdamConfig cfg, std::span<const Matrix* const> params) : config(cfg) {
  for (const Matrix* p : params) {
    first.emplace_back(p->rows(), p->cols());
    second.emplace_back(p->rows(), p->cols());
  }
}

AdamState AdamState::for_mlp(AdamConfig cfg, const MlpParams& params) {
  auto t = params.tensors();
  return AdamState(cfg, t);
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first.size()) {
    throw DimensionError("adam: " + std::to_string(params.size()) + " parameters, " +
                         std::to_string(grads.size()) + " gradients, " +
                         std::to_string(state.first.size()) + " accumulators");
  }
  const std::size_t step = state.step + 1;
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(*params[i], *grads[i], "adam parameter/gradient");
    require_same_shape(*params[i], state.first[i], "adam parameter/state");
    if (!grads[i]->all_finite()) throw TrainingError("non-finite gradient", step);
  }

  const AdamConfig& c = state.config;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i]->data();
    const auto& g = grads[i]->data();
    auto& m = state.first[i].data();
    auto& v = state.second[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      p[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
  state.step = step;
}

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state) {
  auto p = params.tensors();
  auto g = grads.tensors();
  adam_step(p, g, state);
}

}  // namespace afr
