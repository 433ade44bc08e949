#pragma once

#include <stdexcept>
#include <string>

namespace nball {

// Bad arguments to a library call (precondition violations).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or out-of-range run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Linear solve broke down; carries the channel when known.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nball
