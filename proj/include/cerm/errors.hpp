#pragma once

#include <stdexcept>
#include <string>

namespace cerm {

// Error taxonomy mirrors the CLI exit codes: config (2), data (3), model (4).

// Bad run configuration: unknown keys, missing required settings, malformed JSON.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input data: missing files, malformed CSV, NaN where a number is required.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Model-domain violation: non-stationary q, degenerate variance, invalid horizon.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace cerm
