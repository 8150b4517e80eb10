// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <stdexcept>
#include <string>

namespace sdaqec {

/// Invalid or inconsistent user configuration (bad paths, bad schema, bad ranges).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

/// Malformed or unusable input data (undecodable image, bad feature file).
struct DataError : std::runtime_error {
    explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

/// Optimization produced a non-finite loss; training is aborted.
struct TrainingDiverged : std::runtime_error {
    explicit TrainingDiverged(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace sdaqec
