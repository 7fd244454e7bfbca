#pragma once

#include <stdexcept>
#include <string>

namespace surfspec {

// Input validation failures (bad ranges, malformed parameters). CLI exit 2.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct BadParams : ValidationError {
    using ValidationError::ValidationError;
};

struct ZeroField : ValidationError {
    using ValidationError::ValidationError;
};

// Numerical guard failures: the computation refuses to continue rather than
// silently degrade. CLI exit 3.
struct NumericalGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BisectionStall : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};

// A pivot of the shifted factorization fell below the guard; the shift is
// (numerically) an eigenvalue. Callers retry with a jittered shift.
struct SingularShift : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};

struct TruncationTooSmall : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};

struct ProblemTooLarge : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};

struct LambdaTooLarge : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};

struct MarginTooSmall : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};

} // namespace surfspec
