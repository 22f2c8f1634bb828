#pragma once

#include <stdexcept>
#include <string>

namespace kale {

// Malformed or out-of-range input (bad parameters, bad files).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input is well formed but an operation's precondition does not hold.
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class DistanceExceedsPi : public PreconditionError {
public:
    DistanceExceedsPi() : PreconditionError("angular distance exceeds pi") {}
};

class InvalidRho : public InputError {
public:
    explicit InvalidRho(double rho)
        : InputError("sector half-angle must lie in [0, pi/2), got " + std::to_string(rho)) {}
};

class EmptyMeasure : public PreconditionError {
public:
    EmptyMeasure() : PreconditionError("measure has no atoms") {}
};

class AllMassAtOrigin : public PreconditionError {
public:
    AllMassAtOrigin() : PreconditionError("all mass sits at the origin; the moment profile is identically zero") {}
};

class NotSquareIntegrable : public PreconditionError {
public:
    NotSquareIntegrable() : PreconditionError("measure is not square-integrable") {}
};

} // namespace kale
