#pragma once

#include <stdexcept>
#include <string>

namespace kpss {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the requested function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// The origin was passed where the density has a pole or is undefined.
class OriginError : public Error {
 public:
  using Error::Error;
};

class OutOfSupportError : public Error {
 public:
  using Error::Error;
};

/// The super-level set at the requested threshold has zero volume.
class EmptySliceError : public Error {
 public:
  using Error::Error;
};

class NotAvailableError : public Error {
 public:
  using Error::Error;
};

class RejectionBudgetError : public Error {
 public:
  using Error::Error;
};

class DegeneratePairError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFamilyError : public Error {
 public:
  using Error::Error;
};

class NotInLambdaKError : public Error {
 public:
  using Error::Error;
};

/// A theorem hypothesis (e.g. degrees of freedom above a threshold) fails.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class SeriesTooShortError : public Error {
 public:
  using Error::Error;
};

/// Zero empirical variance; autocorrelations are undefined.
class DegenerateSeriesError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kpss
