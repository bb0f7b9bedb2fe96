#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wife {

// Base for every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor/image dimensions do not satisfy an operation's contract.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid argument value (negative step, unknown enum spelling, ...).
class ValueError : public Error {
public:
    using Error::Error;
};

// Malformed PNM input. Carries the byte offset where parsing stopped.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Weights / subband binary container problems: magic, version, CRC, names.
class FormatError : public Error {
public:
    using Error::Error;
};

// Non-finite value produced where the contract forbids it.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace wife
