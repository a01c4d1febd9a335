#pragma once

#include <stdexcept>
#include <string>

namespace bseg {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes:
// usage 2, data 3, numeric 4.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or missing input data (files, headers, dimension mismatches).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric or algorithmic failure (singular systems, degenerate fits,
// empty reconstructions).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bseg
