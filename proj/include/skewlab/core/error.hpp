#pragma once

#include <stdexcept>
#include <string>

namespace skewlab {

// Bad or inconsistent user input (files, keys, values). Maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A precondition of a mathematical operation does not hold.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Iteration caps and size limits.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace skewlab
