#pragma once

#include <stdexcept>
#include <string>

namespace tpa {

// Errors in input files, dataset contents, or dataset/model dimension
// agreement. The CLI maps these to exit code 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Errors in the JSON run configuration (unknown keys, bad values).
// The CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite losses or gradients during training. The CLI maps these to
// exit code 4.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace tpa
