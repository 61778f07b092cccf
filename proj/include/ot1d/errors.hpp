#pragma once

#include <stdexcept>
#include <string>

namespace ot1d {

/// Base class for errors raised during a computation that started from
/// valid inputs (as opposed to precondition violations, which throw
/// std::invalid_argument or std::domain_error).
class ComputationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The monotone plan needs to split a source atom, so no transport map exists.
class NoMongeMapError : public ComputationError {
public:
  using ComputationError::ComputationError;
};

/// An operation that relies on the growth condition g(x-y) <= A + B(g(x)+g(y))
/// was called with a cost function that carries no growth constants.
class GrowthConstantsMissingError : public ComputationError {
public:
  using ComputationError::ComputationError;
};

/// A quantile curve that must be nondecreasing came out decreasing far beyond
/// what Monte Carlo noise can explain.
class MonotonicityError : public ComputationError {
public:
  using ComputationError::ComputationError;
};

/// Problem instance exceeds a documented size limit.
class SizeLimitError : public ComputationError {
public:
  using ComputationError::ComputationError;
};

} // namespace ot1d
