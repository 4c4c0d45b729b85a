#pragma once

#include <stdexcept>

namespace coopsense {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A factorization failed or a result came out non-finite.
class NumericError : public Error {
public:
  using Error::Error;
};

/// The threshold coincides with the mean of the statistic (or the
/// statistic has no spread), so no saddle point exists.
class DegenerateThreshold : public Error {
public:
  using Error::Error;
};

/// The threshold cannot be reached by the LMGF derivative on its domain.
class UnreachableThreshold : public Error {
public:
  using Error::Error;
};

class UnsupportedKind : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

/// Too many realizations of a sweep row had to be discarded.
class ExclusionBudgetExceeded : public NumericError {
public:
  using NumericError::NumericError;
};

}  // namespace coopsense
