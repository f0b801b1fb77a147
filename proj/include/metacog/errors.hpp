// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace metacog {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value or structure violates a documented precondition or invariant.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// All observations share a single coordinate; equal-width binning is undefined.
class DegenerateRange : public Error {
 public:
  using Error::Error;
};

/// Too few usable points to fit the requested model.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite intermediate or result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The filesystem refused us.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Ingestion finished with zero accepted records.
class EmptyInput : public Error {
 public:
  using Error::Error;
};

}  // namespace metacog
