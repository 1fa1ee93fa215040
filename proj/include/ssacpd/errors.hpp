#pragma once

#include <stdexcept>
#include <string>

namespace ssacpd {

// Invalid arguments, malformed configs, contract violations detected up front.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failures: singular covariances, rank deficiency, diverged optimization.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem and parsing failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ssacpd
