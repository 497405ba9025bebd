#pragma once

#include <stdexcept>
#include <string>

namespace nort {

// Index or mode outside the declared shape.
struct BoundsError : std::out_of_range {
    explicit BoundsError(const std::string& msg) : std::out_of_range(msg) {}
};

// Invalid problem description (bad key, bad range, inconsistent dimensions).
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Malformed or inconsistent input data (files, observation sets).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace nort
