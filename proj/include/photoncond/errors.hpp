#ifndef PHOTONCOND_ERRORS_HPP
#define PHOTONCOND_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace photoncond {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument (bad shape, out-of-range parameter, non-Hermitian input).
class ArgumentError : public Error {
public:
  using Error::Error;
};

/// Requested dimension or problem size exceeds a configured limit.
class ResourceError : public Error {
public:
  using Error::Error;
};

/// A numerical routine failed (no convergence, defective matrix, ...).
class NumericError : public Error {
public:
  using Error::Error;
};

/// The operation is not defined for this model/gauge combination.
class UnsupportedError : public Error {
public:
  using Error::Error;
};

} // namespace photoncond

#endif // PHOTONCOND_ERRORS_HPP
