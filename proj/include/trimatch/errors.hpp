#pragma once

#include <stdexcept>
#include <string>

namespace trimatch {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A parameter is outside its mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Problem size exceeds a supported bound.
class CapacityError : public Error {
public:
    using Error::Error;
};

// Malformed input data; message carries line numbers where applicable.
class ParseError : public Error {
public:
    using Error::Error;
};

// Design matrix is rank deficient; message names the offending columns.
class SingularFitError : public Error {
public:
    using Error::Error;
};

// Iterative fit failed to converge within the iteration cap.
class NonConvergenceError : public Error {
public:
    using Error::Error;
};

} // namespace trimatch
