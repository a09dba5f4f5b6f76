#pragma once

#include <stdexcept>
#include <string>

namespace ssflab {

/// Input violates a documented precondition (bad dimension, negative epsilon,
/// mismatched lengths, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not be carried out: dense cap exceeded, non-Hermitian
/// assembly, too few points for a regression.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssflab
