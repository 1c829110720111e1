// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace afr {

/// Dense row-major matrix of 64-bit reals. Rows are samples throughout the
/// library (a batch of n feature vectors is an n x d matrix).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix row_vector(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool all_finite() const noexcept;
  std::string shape() const;

  /// Exact element-wise equality, including shape.
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Dense kernels. All throw DimensionError on shape mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix concat_cols(const Matrix& a, const Matrix& b);
Matrix slice_cols(const Matrix& a, std::size_t begin, std::size_t end);
Matrix slice_rows(const Matrix& a, std::size_t begin, std::size_t end);
Matrix gather_rows(const Matrix& a, std::span<const std::size_t> rows);
/// Adds the 1 x cols row vector `bias` to every row of `a`.
Matrix add_row_bias(const Matrix& a, const Matrix& bias);
/// Column sums as a 1 x cols row vector.
Matrix column_sums(const Matrix& a);
double sum(const Matrix& a);
double squared_distance(std::span<const double> a, std::span<const double> b);

void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace afr
