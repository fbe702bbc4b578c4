#pragma once

#include <stdexcept>

namespace csf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A polygon segment has zero length (mesh collapse or bad initial data).
struct DegenerateCurveError : Error {
    using Error::Error;
};

// Elimination hit a vanishing pivot; the system has no unique solution.
struct SingularSystemError : Error {
    using Error::Error;
};

// Invalid sizes, steps, ranges or option values.
struct ConfigError : Error {
    using Error::Error;
};

// The operation needs ProblemSpec::exact and the problem does not carry one.
struct MissingExactSolutionError : Error {
    using Error::Error;
};

} // namespace csf
