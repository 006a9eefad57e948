#pragma once

#include <stdexcept>
#include <string>

namespace gcusp {

/// Base class of every error raised by the library. The C API maps each
/// subclass onto one status code (see gcusp.h).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (empty grids, bad ranges, non-finite values).
class InputError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of the mathematical function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation requested at (or numerically on top of) a pole.
class PoleError : public Error {
public:
    using Error::Error;
};

/// The request lies outside the regime where the numerics are reliable.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// Discretization too coarse for the requested accuracy.
class AccuracyError : public Error {
public:
    using Error::Error;
};

/// A contour search whose winding number disagrees with the located zeros.
class IncompleteSearchError : public Error {
public:
    using Error::Error;
};

/// Configuration text could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace gcusp
