#pragma once

#include <stdexcept>
#include <string>

namespace dynlr {

/// Malformed or inconsistent input data (non-finite entries, shape mismatch).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A parameter outside its admissible range.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Arithmetic breakdown inside an iteration (zero denominator, divergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StepsizeTooLarge : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Problems with configuration files or command line values.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dynlr
