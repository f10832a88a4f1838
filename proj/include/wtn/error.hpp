#pragma once

#include <stdexcept>
#include <string>

namespace wtn {

/// Base exception for all recoverable failures raised by the library
/// (invalid input data, violated preconditions, solver non-convergence).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input file could not be parsed. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace wtn
