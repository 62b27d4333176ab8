#pragma once

#include <stdexcept>
#include <string>

namespace tvme {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad inputs, preconditions, or configuration. CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Conditioning problems, non-convergence, degenerate systems. CLI exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// File and parsing problems. CLI exit code 4.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace tvme
