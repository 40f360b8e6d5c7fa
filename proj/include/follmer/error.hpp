#pragma once

#include <stdexcept>
#include <string>

namespace follmer {

/// Raised when an operation's precondition is violated (dimension mismatch,
/// time outside the horizon, malformed partition, ...).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a second derivative cannot be factored through a bilinear map.
class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw ContractError(message);
    }
}

}  // namespace follmer
