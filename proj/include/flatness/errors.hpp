#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flatness {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Expression syntax error; `position` is a byte offset into the input text.
struct ParseError : Error {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : Error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

/// Malformed system or candidate file: missing fields, wrong types, bad names.
struct SchemaError : Error {
    using Error::Error;
};

/// A system violates one of its structural rank or consistency requirements.
struct ValidationError : Error {
    using Error::Error;
};

/// Division by an identically-zero expression, or evaluation at a pole.
struct MathError : Error {
    using Error::Error;
};

/// Triangular elimination could not invert the extended map.
struct InversionError : Error {
    using Error::Error;
};

/// A certified invariant failed; indicates a bug, not a property of the input.
struct InternalError : Error {
    using Error::Error;
};

} // namespace flatness
