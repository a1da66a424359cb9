#pragma once

#include <stdexcept>
#include <string>

namespace gridflow {

/// Bad or missing configuration value. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A pipeline stage input artifact is absent. CLI maps this to exit code 3.
struct MissingArtifactError : std::runtime_error {
    explicit MissingArtifactError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input data failed validation (malformed CSV row, broken route, ...).
/// CLI maps this to exit code 4.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace gridflow
