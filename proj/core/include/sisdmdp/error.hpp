#pragma once

#include <stdexcept>
#include <string>

namespace sisdmdp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a model invariant (dimensions, stochasticity, structure).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical routine could not produce a result (singular system, zero pivot mass, ...).
class SolverError : public Error {
public:
    using Error::Error;
};

/// A time budget attached to a run was exhausted.
class BudgetExceeded : public SolverError {
public:
    BudgetExceeded() : SolverError("time budget exceeded") {}
};

/// Malformed serialized document.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace sisdmdp
