// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "afr/matrix.hpp"

namespace afr {

/// Handle to a node recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

class Gradients;

/// Reverse-mode recording of dense matrix expressions.
///
/// Nodes are appended in evaluation order, so the node index is already a
/// topological order; backward() sweeps it once in reverse. Only the ops the
/// MLP losses need are provided. Second-order terms (the gradient penalty) are
/// obtained by recording the first-order input gradient as ordinary forward
/// ops, with ReLU masks frozen as constants via mask().
///
/// A tape is single-writer: build, then differentiate, then discard.
class Tape {
 public:
  Var constant(Matrix value);
  /// Leaf whose gradient is reported by backward().
  Var variable(Matrix value);

  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);  // a * b^T
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var add_row_bias(Var a, Var bias);
  Var relu(Var a);
  /// Element-wise product with a constant matrix.
  Var mask(Var a, Matrix mask);
  Var concat_cols(Var a, Var b);
  Var slice_rows(Var a, std::size_t begin, std::size_t end);
  /// Per-row L2 norm, n x 1. The derivative at a zero row is taken as 0 and
  /// the row is counted in zero_norm_rows().
  Var row_norms(Var a);
  Var add_scalar(Var a, double s);
  Var scale(Var a, double s);
  Var square(Var a);
  Var mean(Var a);
  Var sum(Var a);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t zero_norm_rows() const noexcept;

  /// Recomputes every derived node from the leaves and reports whether each
  /// recomputed value is bit-identical to the cached one.
  bool replay_matches() const;

  /// Gradients of the 1 x 1 node `loss` with respect to every node.
  Gradients backward(Var loss) const;

 private:
  enum class Op {
    kConstant, kVariable, kMatMul, kMatMulNT, kAdd, kSub, kAddRowBias, kRelu, kMask,
    kConcatCols, kSliceRows, kRowNorms, kAddScalar, kScale, kSquare, kMean, kSum
  };

  struct Node {
    explicit Node(Op o, std::size_t lhs = 0, std::size_t rhs = 0) : op(o), a(lhs), b(rhs) {}

    Op op;
    std::size_t a = 0, b = 0;
    Matrix value;
    Matrix aux;              // mask() operand
    double scalar = 0.0;     // add_scalar/scale operand
    std::size_t begin = 0, end = 0;
    std::size_t zero_rows = 0;
    bool needs_grad = false;
  };

  Var push(Node node);
  Matrix evaluate(const Node& node, const std::vector<Matrix>* values,
                  std::size_t* zero_rows) const;

  std::vector<Node> nodes_;
};

/// Result of Tape::backward. Nodes the loss does not depend on have an
/// all-zero gradient of their own shape.
class Gradients {
 public:
  const Matrix& operator[](Var v) const { return grads_.at(v.id); }

 private:
  friend class Tape;
  std::vector<Matrix> grads_;
};

}  // namespace afr
