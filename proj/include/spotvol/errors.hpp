#pragma once

#include <stdexcept>
#include <string>

namespace spotvol {

// Invalid parameters or arguments outside their documented domain.
class DomainError : public std::invalid_argument {
public:
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A numerical procedure failed to converge or overflowed; the message
// carries whatever diagnostics the caller can act on.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (files, panels, series).
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad run configuration (missing paths, inconsistent dates, ...).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spotvol
