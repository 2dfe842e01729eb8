#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace colat {

// Failures are split into two categories so callers (and the CLI exit code)
// can distinguish bad input from a numerical breakdown.
enum class ErrorCategory { input, numeric };

// Every throw site tags the error with a stable machine-readable kind
// ("IncompleteTable", "UnknownComponent", ...) that tests and the JSON error
// channel key on; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message,
          ErrorCategory category = ErrorCategory::input)
        : std::runtime_error(kind + ": " + message),
          kind_(std::move(kind)),
          category_(category) {}

    const std::string& kind() const noexcept { return kind_; }
    ErrorCategory category() const noexcept { return category_; }

private:
    std::string kind_;
    ErrorCategory category_;
};

}  // namespace colat
