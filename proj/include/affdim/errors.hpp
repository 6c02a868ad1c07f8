#pragma once

#include <stdexcept>
#include <string>

namespace affdim {

/// Bad input: malformed words, measures, configs. CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numeric failure at runtime (non-contracting system, degenerate data). CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Work-budget violations (e.g. pressure level too deep). CLI exit code 3.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace affdim
