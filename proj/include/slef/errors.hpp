#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slef {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad arguments to an operation (angle out of range, empty window, ...)
struct InvalidArgument : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, double residual_, std::size_t iterations_)
        : Error(what), residual(residual_), iterations(iterations_) {}
    double residual;
    std::size_t iterations;
};

// an invariant that the discrete theory guarantees was broken; indicates a bug
struct InvariantViolation : Error {
    using Error::Error;
};

// an ODE profile left its positivity window
struct ProfileExistenceError : Error {
    ProfileExistenceError(const std::string& what, double hit)
        : Error(what), hitting_time(hit) {}
    double hitting_time;
};

}  // namespace slef
