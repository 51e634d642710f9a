#pragma once

#include <stdexcept>
#include <string>

namespace lptem {

// Base for every error the library raises. The CLI maps the subclasses onto
// exit codes: ParameterError/ConfigError/InputError -> 2, everything else -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid numeric parameters (negative diffusion coefficient, H outside (0,1), ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Caller-supplied data is inconsistent (dimension mismatch, mismatched frame ranges).
class InputError : public Error {
public:
    using Error::Error;
};

/// Not enough samples/pairs to evaluate a statistic.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// SNR is undefined for the given image/mask pair.
class UndefinedSnrError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failures and malformed files on disk.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace lptem
