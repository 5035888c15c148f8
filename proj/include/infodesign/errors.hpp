#pragma once

#include <stdexcept>
#include <string>

namespace infodesign {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The problem (or prior) admits no feasible structure at the working tolerance.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

class InfeasiblePrior : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

class InfeasibleProblem : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

class NotInSet : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

class Unpersuadable : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

/// Numerical trouble: rank detection, non-convergence, undecidable membership.
class NumericalError : public Error {
public:
    using Error::Error;
};

class NumericalRankFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class Indeterminate : public NumericalError {
public:
    Indeterminate(const std::string& what, double gap) : NumericalError(what), gap_(gap) {}
    double gap() const noexcept { return gap_; }

private:
    double gap_;
};

class NonConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An iteration cap was reached; residual() is the last measured error.
class MaxIterations : public NumericalError {
public:
    MaxIterations(const std::string& what, double residual) : NumericalError(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class NoRoot : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Input document does not match the expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

} // namespace infodesign
