#pragma once

#include <stdexcept>
#include <string>

namespace rpys {

// Base for every error raised by the library. Callers that only care about
// "did it work" can catch this; the subclasses exist so the CLI and the
// HTTP layer can map failures onto exit codes and status codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input does not follow the tagged export layout (missing header, etc.).
class FormatError : public Error {
public:
    using Error::Error;
};

// A record block was opened but never closed with ER.
class TruncationError : public FormatError {
public:
    TruncationError(const std::string& what, std::size_t line)
        : FormatError(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Caller passed arguments outside an operation's domain.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// An operation referenced state the workspace does not have.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// Persisted workspace is damaged (truncated, checksum mismatch, bad JSON).
class IntegrityError : public Error {
public:
    using Error::Error;
};

class UnsupportedVersionError : public Error {
public:
    using Error::Error;
};

// Filesystem failures: unreadable input, unwritable output.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rpys
