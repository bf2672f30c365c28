#pragma once

#include <stdexcept>
#include <string>

namespace clipstate {

/// Input or data that violates a documented invariant. CLI exit status 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed document; message carries line and column.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : ValidationError(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Weight vector whose L1 norm is too small to normalize the ensemble score.
class DegenerateWeightsError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Embedding service unreachable, timed out or returned a non-2xx status. CLI exit status 2.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace clipstate
