#pragma once

#include <stdexcept>
#include <string>

namespace gesp {

/// Coarse failure class used by the CLI to pick an exit code:
/// bad inputs/preconditions vs. a numeric result that disqualifies itself.
enum class ErrorCategory { Validation, Numeric };

/// Base of all library errors. Carries a stable machine-readable code
/// (e.g. "TooManyModes") next to the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, ErrorCategory category, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)), category_(category) {}

    const std::string& code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_; }

private:
    std::string code_;
    ErrorCategory category_;
};

class ValidationError : public Error {
public:
    ValidationError(std::string code, const std::string& message)
        : Error(std::move(code), ErrorCategory::Validation, message) {}
};

class NumericError : public Error {
public:
    NumericError(std::string code, const std::string& message)
        : Error(std::move(code), ErrorCategory::Numeric, message) {}
};

}  // namespace gesp
