#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bytesort {

// Root of every error the library throws. Callers that only care about
// "something went wrong" catch this; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class EmptyFile : public Error {
public:
    using Error::Error;
};

class FileTooShort : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    FormatError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ChecksumError : public Error {
public:
    using Error::Error;
};

class EmptySupervisedSet : public Error {
public:
    using Error::Error;
};

// Model file errors.
class BadMagic : public Error {
public:
    using Error::Error;
};

class VersionUnsupported : public Error {
public:
    using Error::Error;
};

class HashMismatch : public Error {
public:
    using Error::Error;
};

class CountMismatch : public Error {
public:
    using Error::Error;
};

} // namespace bytesort
