// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace cgrg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class SequenceTooLong : public Error {
 public:
  SequenceTooLong() : Error("sequence too long") {}
  explicit SequenceTooLong(const std::string& detail)
      : Error("sequence too long: " + detail) {}
};

class ConstraintsUnsatisfiable : public Error {
 public:
  ConstraintsUnsatisfiable()
      : Error("constraints unsatisfiable within max_new_tokens") {}
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace cgrg
