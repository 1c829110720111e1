// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "afr/mlp.hpp"

#include <cmath>

#include "afr/errors.hpp"

namespace afr {

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double limit, Rng& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

Matrix positive_mask(const Matrix& pre) {
  Matrix m(pre.rows(), pre.cols());
  for (std::size_t i = 0; i < pre.size(); ++i) m.data()[i] = pre.data()[i] > 0.0 ? 1.0 : 0.0;
  return m;
}

}  // namespace

MlpParams MlpParams::zeros(std::size_t in, std::size_t hidden, std::size_t out) {
  return {Matrix(in, hidden), Matrix(1, hidden), Matrix(hidden, hidden),
          Matrix(1, hidden),  Matrix(hidden, out), Matrix(1, out)};
}

MlpParams MlpParams::glorot(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  auto limit = [](std::size_t a, std::size_t b) {
    return std::sqrt(6.0 / static_cast<double>(a + b));
  };
  MlpParams p = zeros(in, hidden, out);
  p.w1 = uniform_matrix(in, hidden, limit(in, hidden), rng);
  p.w2 = uniform_matrix(hidden, hidden, limit(hidden, hidden), rng);
  p.w3 = uniform_matrix(hidden, out, limit(hidden, out), rng);
  return p;
}

void MlpParams::validate() const {
  const bool ok = b1.rows() == 1 && b1.cols() == w1.cols() && w2.rows() == w1.cols() &&
                  b2.rows() == 1 && b2.cols() == w2.cols() && w3.rows() == w2.cols() &&
                  b3.rows() == 1 && b3.cols() == w3.cols();
  if (!ok) {
    throw DimensionError("mlp layers do not compose: w1 " + w1.shape() + ", b1 " + b1.shape() +
                         ", w2 " + w2.shape() + ", b2 " + b2.shape() + ", w3 " + w3.shape() +
                         ", b3 " + b3.shape());
  }
}

MlpVars bind(Tape& tape, const MlpParams& p, bool trainable) {
  p.validate();
  auto leaf = [&](const Matrix& m) { return trainable ? tape.variable(m) : tape.constant(m); };
  return {leaf(p.w1), leaf(p.b1), leaf(p.w2), leaf(p.b2), leaf(p.w3), leaf(p.b3)};
}

MlpGrads gradients_of(const Gradients& g, const MlpVars& v) {
  return {g[v.w1], g[v.b1], g[v.w2], g[v.b2], g[v.w3], g[v.b3]};
}

MlpTrace mlp_forward(Tape& tape, const MlpVars& v, Var input) {
  const std::size_t in_cols = tape.value(input).cols();
  if (in_cols != tape.value(v.w1).rows()) {
    throw DimensionError("mlp input has " + std::to_string(in_cols) + " columns, w1 is " +
                         tape.value(v.w1).shape());
  }
  MlpTrace t;
  t.pre1 = tape.add_row_bias(tape.matmul(input, v.w1), v.b1);
  t.pre2 = tape.add_row_bias(tape.matmul(tape.relu(t.pre1), v.w2), v.b2);
  t.output = tape.add_row_bias(tape.matmul(tape.relu(t.pre2), v.w3), v.b3);
  return t;
}

Matrix mlp_forward(const MlpParams& p, const Matrix& input) {
  p.validate();
  if (input.cols() != p.input_dim()) {
    throw DimensionError("mlp input " + input.shape() + " vs w1 " + p.w1.shape());
  }
  auto relu = [](Matrix m) {
    for (double& v : m.data()) v = v > 0.0 || std::isnan(v) ? v : 0.0;
    return m;
  };
  Matrix h1 = relu(add_row_bias(matmul(input, p.w1), p.b1));
  Matrix h2 = relu(add_row_bias(matmul(h1, p.w2), p.b2));
  return add_row_bias(matmul(h2, p.w3), p.b3);
}

Var input_gradient(Tape& tape, const MlpVars& v, const MlpTrace& trace, std::size_t x_cols) {
  const Matrix& w3 = tape.value(v.w3);
  if (w3.cols() != 1) {
    throw DimensionError("input gradient needs a scalar-output network, w3 is " + w3.shape());
  }
  if (x_cols > tape.value(v.w1).rows()) {
    throw DimensionError("input gradient over " + std::to_string(x_cols) +
                         " columns of a network with input width " +
                         std::to_string(tape.value(v.w1).rows()));
  }
  const std::size_t n = tape.value(trace.output).rows();
  Var ones = tape.constant(Matrix(n, 1, 1.0));
  // Backpropagate a unit seed through the layers, reusing the forward masks.
  Var d2 = tape.mask(tape.matmul_nt(ones, v.w3), positive_mask(tape.value(trace.pre2)));
  Var d1 = tape.mask(tape.matmul_nt(d2, v.w2), positive_mask(tape.value(trace.pre1)));
  return tape.matmul_nt(d1, tape.slice_rows(v.w1, 0, x_cols));
}

Matrix input_gradient(const MlpParams& params, const Matrix& x, const Matrix& condition) {
  Tape tape;
  MlpVars v = bind(tape, params, false);
  Var input = tape.constant(concat_cols(x, condition));
  MlpTrace trace = mlp_forward(tape, v, input);
  return tape.value(input_gradient(tape, v, trace, x.cols()));
}

Var gradient_penalty(Tape& tape, const MlpVars& v, Var x_bar, Var condition, double lambda) {
  if (lambda < 0.0) throw ContractError("gradient penalty weight must be >= 0");
  if (tape.value(x_bar).rows() == 0) throw ContractError("gradient penalty on an empty batch");
  MlpTrace trace = mlp_forward(tape, v, tape.concat_cols(x_bar, condition));
  Var grad = input_gradient(tape, v, trace, tape.value(x_bar).cols());
  Var gap = tape.square(tape.add_scalar(tape.row_norms(grad), -1.0));
  return tape.scale(tape.mean(gap), lambda);
}

PenaltyResult gradient_penalty(const MlpParams& params, const Matrix& x_bar,
                               const Matrix& condition, double lambda) {
  Tape tape;
  MlpVars v = bind(tape, params, true);
  Var penalty = gradient_penalty(tape, v, tape.constant(x_bar), tape.constant(condition), lambda);
  PenaltyResult r;
  r.value = tape.value(penalty)(0, 0);
  r.grads = gradients_of(tape.backward(penalty), v);
  r.zero_norm_rows = tape.zero_norm_rows();
  return r;
}

}  // namespace afr
