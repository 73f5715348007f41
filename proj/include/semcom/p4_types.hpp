#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "semcom/errors.hpp"

namespace semcom {

enum class LineSearchMode {
    FixedInnerPoint,  // trial residuals reuse the already-solved (p, B)
    ResolvePerTrial,  // every trial re-solves the inner problem
};

inline std::string_view to_string(LineSearchMode m) {
    return m == LineSearchMode::FixedInnerPoint ? "fixed-inner-point" : "resolve-per-trial";
}

inline LineSearchMode line_search_mode_from_string(std::string_view s) {
    if (s == "fixed-inner-point") return LineSearchMode::FixedInnerPoint;
    if (s == "resolve-per-trial") return LineSearchMode::ResolvePerTrial;
    throw ConfigError("unknown line_search_mode '" + std::string(s) + "'");
}

/// Settings of the damped Newton iteration on the auxiliary variables.
struct NewtonConfig {
    double xi = 0.5;      // step shrink factor
    double eps = 0.1;     // sufficient-decrease factor
    int max_iter = 50;
    double phi_tol = 1e-10;  // on the scaled residual norm
    LineSearchMode line_search_mode = LineSearchMode::FixedInnerPoint;

    void validate() const {
        if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("newton.xi must lie in (0, 1)");
        if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("newton.eps must lie in (0, 1)");
        if (max_iter < 1) throw ConfigError("newton.max_iter must be >= 1");
        if (!(phi_tol > 0.0)) throw ConfigError("newton.phi_tol must be > 0");
    }
};

/// Parameters of the convex surrogate: gamma_n = w2 / r_n and delta_n = e_up,n at the fixed point.
struct AuxiliaryState {
    std::vector<double> gamma;
    std::vector<double> delta;
};

/// Lower bounds on rate and SNR that (p, B) must respect for fixed (rho, f, h, deadline).
struct P4Floors {
    std::vector<double> rate;  // bits/s
    std::vector<double> snr;
};

/// Primal point and multipliers of the convex surrogate for fixed auxiliary variables.
struct P7Point {
    std::vector<double> power;
    std::vector<double> bandwidth;
    double zeta = 0.0;        // sum B <= B_total
    std::vector<double> eta;  // rate floors
    std::vector<double> nu;   // SNR floors
    std::vector<double> iota; // p <= p_max
};

enum class P4Status { Converged, NotConverged };

struct P4Solution {
    std::vector<double> power;
    std::vector<double> bandwidth;
    AuxiliaryState aux;
    double zeta = 0.0;
    std::vector<double> eta, nu, iota;
    double phi_norm = 0.0;  // scaled residual at the returned point
    int iterations = 0;
    double energy = 0.0;    // sum of uplink energies (unweighted)
    P4Status status = P4Status::Converged;
    bool used_fallback = false;
    std::vector<double> phi_trace;  // scaled residual norm per iteration

    bool converged() const noexcept { return status == P4Status::Converged; }
};

}  // namespace semcom
