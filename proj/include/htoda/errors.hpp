#pragma once

#include <stdexcept>
#include <string>

namespace htoda {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Evaluation outside an open domain (or within 1e-10 of an endpoint).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Root finder or iteration exhausted its budget without converging.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Constructor parameter outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A user-supplied generator function failed positivity/monotonicity checks.
class MonotonicityError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// An energy function is not strictly convex where it must be.
class ConvexityError : public Error {
public:
    using Error::Error;
};

/// A verification was requested on a system violating its hypotheses.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// A stored time grid is too short for the requested stencil.
class GridError : public Error {
public:
    using Error::Error;
};

/// Scenario / configuration file is malformed or inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace htoda
