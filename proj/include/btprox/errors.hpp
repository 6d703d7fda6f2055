#pragma once

#include <stdexcept>

namespace btprox {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration value violates its documented invariant.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An input lies outside the domain a model is defined on.
class DomainError : public Error {
public:
    using Error::Error;
};

class InvalidStateError : public Error {
public:
    using Error::Error;
};

class InvalidBitrateError : public Error {
public:
    using Error::Error;
};

}  // namespace btprox
