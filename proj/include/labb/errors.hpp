#pragma once

#include <stdexcept>
#include <string>

namespace labb {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, configs, datasets).
struct ValidationError : Error {
    using Error::Error;
};

// A request outside the mathematical or temporal domain of an operation
// (date not listed, T <= N+4, singular covariance, ...).
struct DomainError : Error {
    using Error::Error;
};

} // namespace labb
