// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace atkse {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The requested configuration cannot be executed (e.g. a budget of zero flips).
class InfeasibleConfig : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed, or a file is malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared in a computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// No strictly positive saliency remained; the attack cannot pick an edge.
class DegenerateGradient : public Error {
 public:
  using Error::Error;
};

}  // namespace atkse
