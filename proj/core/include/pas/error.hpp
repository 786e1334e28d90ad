#pragma once

#include <stdexcept>
#include <string>

namespace pas {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (shape mismatch, bad ratio, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Input files or generated datasets are malformed.
class DataError : public Error {
 public:
  using Error::Error;
};

// A forward or backward pass produced NaN/Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace pas
