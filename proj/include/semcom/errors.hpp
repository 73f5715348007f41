#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semcom {

/// Base class of every error raised by the solver library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A formula was evaluated outside its domain (non-positive power, bandwidth, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A rate of zero makes the uplink time undefined.
class InfeasibleTransmission : public Error {
public:
    using Error::Error;
};

/// The PSNR floor cannot be met at rho_max for the given (p, B).
class InfeasibleRho : public Error {
public:
    InfeasibleRho(std::size_t device, double rho_bar, double rho_max)
        : Error("device " + std::to_string(device) + ": required compression rate " +
                std::to_string(rho_bar) + " exceeds rho_max " + std::to_string(rho_max)),
          device_(device), rho_bar_(rho_bar) {}

    std::size_t device() const noexcept { return device_; }
    double rho_bar() const noexcept { return rho_bar_; }

private:
    std::size_t device_;
    double rho_bar_;
};

/// Requested deadline is at or below the device's minimum achievable time.
class DeadlineInfeasible : public Error {
public:
    using Error::Error;
};

/// Deadline leaves no time for the uplink after computation.
class DeadlineExhausted : public Error {
public:
    using Error::Error;
};

/// A rate (or SNR) floor cannot be met even with p_max and the whole band.
class RateFloorUnreachable : public Error {
public:
    RateFloorUnreachable(std::size_t device, const std::string& what)
        : Error("device " + std::to_string(device) + ": " + what), device_(device) {}

    std::size_t device() const noexcept { return device_; }

private:
    std::size_t device_;
};

/// Weights for which a subproblem has no minimiser (omega_1 = 0 in P3).
class DegenerateWeights : public Error {
public:
    using Error::Error;
};

/// No feasible starting point exists for the scenario.
class ScenarioInfeasible : public Error {
public:
    using Error::Error;
};

/// A bracketing root search failed; carries the last residual seen.
class BracketingFailure : public Error {
public:
    BracketingFailure(const std::string& what, double residual)
        : Error(what + " (last residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Malformed configuration or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace semcom
