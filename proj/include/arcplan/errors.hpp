#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace arcplan {

// Base for every error raised by the library. The CLI maps subclasses to exit
// statuses, so new error kinds should derive from one of these.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition.
class ContractViolation : public Error {
public:
    using Error::Error;
};

// Malformed input file (PGM, key=value config, CSV).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    explicit ParseError(const std::string& what) : Error(what), offset_(0) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Implicit step did not reach the residual tolerance.
class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Adaptive integrator step size collapsed.
class StiffnessError : public Error {
public:
    using Error::Error;
};

// Stability function evaluated at a pole.
class PoleError : public Error {
public:
    using Error::Error;
};

// A rollout produced non-finite values.
class DivergenceError : public Error {
public:
    using Error::Error;
};

class NoPathError : public Error {
public:
    using Error::Error;
};

class ConnectorInfeasible : public Error {
public:
    ConnectorInfeasible(const std::string& what, std::vector<double> violations = {})
        : Error(what), violations_(std::move(violations)) {}

    const std::vector<double>& violations() const noexcept { return violations_; }

private:
    std::vector<double> violations_;
};

}  // namespace arcplan
