// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "afr/autodiff.hpp"

#include <cmath>
#include <cstring>

#include "afr/errors.hpp"

namespace afr {

namespace {

bool bit_equal(const Matrix& x, const Matrix& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() &&
         std::memcmp(x.data().data(), y.data().data(), x.size() * sizeof(double)) == 0;
}

void accumulate(Matrix& into, const Matrix& delta) {
  for (std::size_t i = 0; i < into.size(); ++i) into.data()[i] += delta.data()[i];
}

}  // namespace

Var Tape::push(Node node) {
  node.value = evaluate(node, nullptr, &node.zero_rows);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Matrix value) {
  Node n{Op::kConstant};
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::variable(Matrix value) {
  Node n{Op::kVariable};
  n.value = std::move(value);
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

#define AFR_BINARY(name, op_tag)                                         \
  Var Tape::name(Var a, Var b) {                                        \
    Node n{Op::op_tag, a.id, b.id};                                     \
    n.needs_grad = nodes_.at(a.id).needs_grad || nodes_.at(b.id).needs_grad; \
    return push(std::move(n));                                          \
  }

AFR_BINARY(matmul, kMatMul)
AFR_BINARY(matmul_nt, kMatMulNT)
AFR_BINARY(add, kAdd)
AFR_BINARY(sub, kSub)
AFR_BINARY(add_row_bias, kAddRowBias)
AFR_BINARY(concat_cols, kConcatCols)

#undef AFR_BINARY

#define AFR_UNARY(name, op_tag)                 \
  Var Tape::name(Var a) {                       \
    Node n{Op::op_tag, a.id};                   \
    n.needs_grad = nodes_.at(a.id).needs_grad;  \
    return push(std::move(n));                  \
  }

AFR_UNARY(relu, kRelu)
AFR_UNARY(row_norms, kRowNorms)
AFR_UNARY(square, kSquare)
AFR_UNARY(mean, kMean)
AFR_UNARY(sum, kSum)

#undef AFR_UNARY

Var Tape::mask(Var a, Matrix mask) {
  Node n{Op::kMask, a.id};
  n.aux = std::move(mask);
  n.needs_grad = nodes_.at(a.id).needs_grad;
  return push(std::move(n));
}

Var Tape::slice_rows(Var a, std::size_t begin, std::size_t end) {
  Node n{Op::kSliceRows, a.id};
  n.begin = begin;
  n.end = end;
  n.needs_grad = nodes_.at(a.id).needs_grad;
  return push(std::move(n));
}

Var Tape::add_scalar(Var a, double s) {
  Node n{Op::kAddScalar, a.id};
  n.scalar = s;
  n.needs_grad = nodes_.at(a.id).needs_grad;
  return push(std::move(n));
}

Var Tape::scale(Var a, double s) {
  Node n{Op::kScale, a.id};
  n.scalar = s;
  n.needs_grad = nodes_.at(a.id).needs_grad;
  return push(std::move(n));
}

Matrix Tape::evaluate(const Node& node, const std::vector<Matrix>* values,
                      std::size_t* zero_rows) const {
  // `values` overrides the cached parent values during replay.
  auto in = [&](std::size_t id) -> const Matrix& {
    return values ? values->at(id) : nodes_.at(id).value;
  };
  switch (node.op) {
    case Op::kConstant:
    case Op::kVariable:
      return node.value;
    case Op::kMatMul:
      return afr::matmul(in(node.a), in(node.b));
    case Op::kMatMulNT:
      return afr::matmul_nt(in(node.a), in(node.b));
    case Op::kAdd:
      return afr::add(in(node.a), in(node.b));
    case Op::kSub:
      return afr::sub(in(node.a), in(node.b));
    case Op::kAddRowBias:
      return afr::add_row_bias(in(node.a), in(node.b));
    case Op::kRelu: {
      Matrix out = in(node.a);
      for (double& v : out.data()) v = v > 0.0 || std::isnan(v) ? v : 0.0;  // NaN propagates
      return out;
    }
    case Op::kMask:
      return afr::hadamard(in(node.a), node.aux);
    case Op::kConcatCols:
      return afr::concat_cols(in(node.a), in(node.b));
    case Op::kSliceRows:
      return afr::slice_rows(in(node.a), node.begin, node.end);
    case Op::kRowNorms: {
      const Matrix& x = in(node.a);
      Matrix out(x.rows(), 1);
      std::size_t zeros = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (double v : x.row(i)) s += v * v;
        out(i, 0) = std::sqrt(s);
        if (s == 0.0) ++zeros;
      }
      if (zero_rows) *zero_rows = zeros;
      return out;
    }
    case Op::kAddScalar: {
      Matrix out = in(node.a);
      for (double& v : out.data()) v += node.scalar;
      return out;
    }
    case Op::kScale:
      return afr::scale(in(node.a), node.scalar);
    case Op::kSquare:
      return afr::hadamard(in(node.a), in(node.a));
    case Op::kMean: {
      const Matrix& x = in(node.a);
      if (x.empty()) throw ContractError("mean of an empty matrix");
      return Matrix(1, 1, afr::sum(x) / static_cast<double>(x.size()));
    }
    case Op::kSum:
      return Matrix(1, 1, afr::sum(in(node.a)));
  }
  throw ContractError("unknown tape op");
}

std::size_t Tape::zero_norm_rows() const noexcept {
  std::size_t total = 0;
  for (const Node& n : nodes_) total += n.zero_rows;
  return total;
}

bool Tape::replay_matches() const {
  std::vector<Matrix> values;
  values.reserve(nodes_.size());
  bool same = true;
  for (const Node& n : nodes_) {
    // Parents always precede children, so `values` is complete for them.
    Matrix v = evaluate(n, &values, nullptr);
    same = same && bit_equal(v, n.value);
    values.push_back(std::move(v));
  }
  return same;
}

Gradients Tape::backward(Var loss) const {
  const Node& root = nodes_.at(loss.id);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw ContractError("backward: loss must be 1x1, got " + root.value.shape());
  }
  Gradients g;
  g.grads_.reserve(nodes_.size());
  for (const Node& n : nodes_) g.grads_.emplace_back(n.value.rows(), n.value.cols());
  g.grads_[loss.id](0, 0) = 1.0;

  for (std::size_t idx = loss.id + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    if (!n.needs_grad) continue;
    const Matrix& d = g.grads_[idx];
    auto& ga = g.grads_[n.a];
    switch (n.op) {
      case Op::kConstant:
      case Op::kVariable:
        break;
      case Op::kMatMul:
        accumulate(ga, afr::matmul_nt(d, nodes_[n.b].value));
        accumulate(g.grads_[n.b], afr::matmul_tn(nodes_[n.a].value, d));
        break;
      case Op::kMatMulNT:
        accumulate(ga, afr::matmul(d, nodes_[n.b].value));
        accumulate(g.grads_[n.b], afr::matmul_tn(d, nodes_[n.a].value));
        break;
      case Op::kAdd:
        accumulate(ga, d);
        accumulate(g.grads_[n.b], d);
        break;
      case Op::kSub:
        accumulate(ga, d);
        accumulate(g.grads_[n.b], afr::scale(d, -1.0));
        break;
      case Op::kAddRowBias:
        accumulate(ga, d);
        accumulate(g.grads_[n.b], afr::column_sums(d));
        break;
      case Op::kRelu: {
        const Matrix& x = nodes_[n.a].value;
        for (std::size_t i = 0; i < x.size(); ++i)
          if (x.data()[i] > 0.0) ga.data()[i] += d.data()[i];
        break;
      }
      case Op::kMask:
        accumulate(ga, afr::hadamard(d, n.aux));
        break;
      case Op::kConcatCols: {
        const std::size_t left = nodes_[n.a].value.cols();
        accumulate(ga, afr::slice_cols(d, 0, left));
        accumulate(g.grads_[n.b], afr::slice_cols(d, left, d.cols()));
        break;
      }
      case Op::kSliceRows: {
        const std::size_t cols = ga.cols();
        for (std::size_t i = 0; i < d.size(); ++i) ga.data()[n.begin * cols + i] += d.data()[i];
        break;
      }
      case Op::kRowNorms: {
        const Matrix& x = nodes_[n.a].value;
        for (std::size_t i = 0; i < x.rows(); ++i) {
          const double norm = n.value(i, 0);
          if (norm == 0.0) continue;
          const double f = d(i, 0) / norm;
          for (std::size_t j = 0; j < x.cols(); ++j) ga(i, j) += f * x(i, j);
        }
        break;
      }
      case Op::kAddScalar:
        accumulate(ga, d);
        break;
      case Op::kScale:
        accumulate(ga, afr::scale(d, n.scalar));
        break;
      case Op::kSquare: {
        const Matrix& x = nodes_[n.a].value;
        for (std::size_t i = 0; i < x.size(); ++i) ga.data()[i] += 2.0 * x.data()[i] * d.data()[i];
        break;
      }
      case Op::kMean: {
        const double f = d(0, 0) / static_cast<double>(ga.size());
        for (double& v : ga.data()) v += f;
        break;
      }
      case Op::kSum:
        for (double& v : ga.data()) v += d(0, 0);
        break;
    }
  }
  return g;
}

}  // namespace afr
