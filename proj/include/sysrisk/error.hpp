#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sysrisk {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input data, arguments or files. Maps to exit status 2 in the CLI.
class InputError : public Error {
public:
    using Error::Error;
};

// A parse failure with a source location (1-based line and column).
class ParseError : public InputError {
public:
    ParseError(std::string file, std::size_t line, std::size_t column, const std::string& what)
        : InputError(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          file_(std::move(file)), line_(line), column_(column) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string file_;
    std::size_t line_;
    std::size_t column_;
};

// Data that admits no meaningful result (e.g. an all-zero exposure layer).
class DegenerateError : public InputError {
public:
    using InputError::InputError;
};

// A request exceeding a configured computation limit (exact EL bank limit).
class LimitError : public Error {
public:
    using Error::Error;
};

}  // namespace sysrisk
