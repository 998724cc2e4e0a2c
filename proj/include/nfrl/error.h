#pragma once

#include <stdexcept>
#include <string>

namespace nfrl {

/// Base for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input file (dataset, schema, model, rule export).
class LoadError : public Error {
public:
    using Error::Error;
};

/// Caller passed arguments that violate an operation's preconditions.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Rule-spec string could not be parsed; `position` is a 0-based byte offset.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Numeric failure during optimization (non-finite loss or gradient).
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace nfrl
