// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace kfc {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Incompatible matrix/layer dimensions.
class ShapeError : public Error {
public:
  using Error::Error;
};

// Invalid argument value (out-of-range rank, bad bounds, ...).
class ArgumentError : public Error {
public:
  using Error::Error;
};

// Result would exceed the allocation cap.
class CapacityError : public Error {
public:
  using Error::Error;
};

// Iterative routine failed to converge.
class NumericError : public Error {
public:
  using Error::Error;
};

// Malformed external byte stream (IDX, checkpoint).
class ParseError : public Error {
public:
  using Error::Error;
};

// Bad run-configuration text.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Filesystem failure.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace kfc
