#pragma once

#include <stdexcept>
#include <string>

namespace latcode {

// Raised when inputs violate a documented precondition (bad dimensions,
// weights that do not sum to one, points outside their space, malformed
// files). Maps to exit code 2 at the CLI and LATCODE_ERR_INVALID in the
// C API.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an iterative routine diverges or fails to converge within
// its budget. Maps to exit code 3 / LATCODE_ERR_NUMERIC.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// File read/write failures. Exit code 2 at the CLI (bad input path is a
// usage error), LATCODE_ERR_IO in the C API.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace latcode
