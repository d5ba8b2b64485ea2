#pragma once

#include <stdexcept>
#include <string>

namespace scefis {

/// Raised when a caller breaks an operation's precondition (bad sizes, empty input, ...).
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised for malformed files or unreadable inputs.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const char* message) {
    if (!condition) throw ContractViolation(message);
}

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractViolation(message);
}

}  // namespace scefis
