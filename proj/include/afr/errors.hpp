// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace afr {

/// Base of every error raised by the library. `kind()` is a stable short tag
/// used by the command-line front end for machine-readable failure lines.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

/// Operand shapes do not compose.
class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension"; }
};

/// A caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract"; }
};

/// Malformed, missing or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "data"; }
};

/// An iterative solver failed to reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  const char* kind() const noexcept override { return "solver"; }
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Optimization produced a non-finite value.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  const char* kind() const noexcept override { return "training"; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace afr
