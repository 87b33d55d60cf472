#pragma once

#include <stdexcept>
#include <string>

namespace dgnn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf showed up in a tensor value.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Input data or configuration violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace dgnn
