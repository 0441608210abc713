#pragma once

#include <stdexcept>
#include <string>

namespace gpcrbo {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad caller input: dimension mismatches, non-positive hyperparameters, ...
struct InvalidArgumentError : Error {
    using Error::Error;
};

// A matrix could not be factorized even after the jitter escalation.
struct FactorizationError : Error {
    using Error::Error;
};

// Malformed or inconsistent run configuration.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace gpcrbo
