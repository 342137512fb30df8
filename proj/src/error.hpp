// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_ERROR_HPP
#define EDGEFLOW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace edgeflow {

// Base for every error the library raises. The C API maps subtypes to
// status codes, so new error kinds should extend one of the classes below.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration value (bad graph size, sparsity budget of zero,
// gamma outside [0,1], malformed config file, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Tensor shape mismatch in a forward op or optimizer update.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Out-of-range edge/node/timestep index.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Violation of the without-replacement rule (duplicate edge in a trajectory).
class MaskViolationError : public Error {
 public:
  using Error::Error;
};

// Trajectory extended past its step budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration would exceed the configured cap.
class EnumerationError : public Error {
 public:
  using Error::Error;
};

// Non-finite value where a finite one is required, or a numerically
// invalid structure (e.g. a Gram matrix with a clearly negative eigenvalue).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation's precondition (non-scalar loss, repeated
// backward, incomplete trajectory handed to the decoder, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Checkpoint container problems: bad magic, version mismatch, truncation.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failure (unreadable/unwritable path).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace edgeflow

#endif  // EDGEFLOW_ERROR_HPP
