#pragma once

// Alternating minimisation: the (rho, f, h, deadline) block by solve_p3, then the (p, B) block
// by solve_p4 warm-started at the current point, until the normalised change is below eps.
//
// The (p, B) block keeps every rate at its floor, and the floors are the rates the point already
// has, so the first two blocks alone never move the uplink rates. With rebalance_uplink set, each
// outer iteration ends with solve_time_split, which re-optimises (p, f, h, deadline) for the
// current (B, rho) and so lets the split between compute and uplink time move.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "semcom/core_model.hpp"
#include "semcom/p3_solver.hpp"
#include "semcom/p4_solver.hpp"
#include "semcom/time_split.hpp"

namespace semcom {

/// Raises rho to the smallest value meeting the PSNR floor at the allocation's (p, B), if needed.
/// Returns false if even rho_max is not enough for some device.
inline bool lift_rho(const Scenario& sc, Allocation& alloc) {
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& d = sc.devices[n];
        const double s = snr(alloc.power[n], alloc.bandwidth[n], d.gain, sc.system.noise_psd);
        const double rho_bar = sc.psnr_model.inverse_rho(d.psnr_min, s);
        if (rho_bar > d.rho_max) return false;
        alloc.rho[n] = std::max(alloc.rho[n], rho_bar);
    }
    return true;
}

/// Midpoint of every box, an equal band split and rho lifted for the PSNR floor.
inline Allocation average_allocation(const Scenario& sc) {
    const std::size_t n_dev = sc.size();
    Allocation a = Allocation::sized(n_dev);
    for (std::size_t n = 0; n < n_dev; ++n) {
        const auto& d = sc.devices[n];
        a.power[n] = d.p_max / 2.0;
        a.bandwidth[n] = sc.system.total_bandwidth / static_cast<double>(n_dev);
        a.freq_device[n] = d.f_max / 2.0;
        a.freq_bs[n] = d.h_max / 2.0;
        a.rho[n] = 0.5 * (d.rho_min + d.rho_max);
    }
    if (!lift_rho(sc, a)) throw ScenarioInfeasible("average allocation: PSNR floor unreachable even at rho_max");
    return a;
}

enum class InitialPointPolicy {
    Average,     // the average allocation only
    MultiStart,  // also start from p_max with the same band split, keep the better result
};

inline std::string_view to_string(InitialPointPolicy p) {
    return p == InitialPointPolicy::Average ? "average" : "multi-start";
}

inline InitialPointPolicy initial_point_policy_from_string(std::string_view s) {
    if (s == "average") return InitialPointPolicy::Average;
    if (s == "multi-start") return InitialPointPolicy::MultiStart;
    throw ConfigError("unknown initial_point_policy '" + std::string(s) + "'");
}

struct OptimizerConfig {
    int max_outer = 20;
    double eps_outer = 1e-4;
    NewtonConfig newton;
    P3Options p3;
    InitialPointPolicy initial_point_policy = InitialPointPolicy::Average;
    bool rebalance_uplink = true;

    void validate() const {
        if (max_outer < 1) throw ConfigError("max_outer must be >= 1");
        if (!(eps_outer > 0.0)) throw ConfigError("eps_outer must be > 0");
        if (!(p3.rel_tol > 0.0) || p3.max_iter < 1) throw ConfigError("p3 tolerances must be positive");
        newton.validate();
    }
};

struct TraceEntry {
    double objective = 0.0;  // after the (p, B) step
    double deadline = 0.0;
    double uplink_energy = 0.0;
    double change = 0.0;
    int newton_iterations = 0;
    bool newton_converged = true;
    bool used_fallback = false;
};

struct SolveTrace {
    std::vector<TraceEntry> iterations;
    double initial_objective = 0.0;
    double best_objective = 0.0;
    bool converged = false;
    int outer_iterations = 0;
    std::string start;  // which initial point produced the result
};

struct SolveResult {
    Allocation allocation;
    ConsumptionReport report;
    SolveTrace trace;
};

/// A subproblem failed inside the outer loop.
class SolveFailure : public Error {
public:
    SolveFailure(int iteration, std::string_view stage, const std::string& cause)
        : Error("outer iteration " + std::to_string(iteration) + ", " + std::string(stage) + ": " + cause),
          iteration_(iteration) {}
    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

inline Allocation initial_feasible_point(const Scenario& sc) { return average_allocation(sc); }

/// Euclidean change between two allocations relative to the first, every coordinate divided by the
/// width of its box so that watts, hertz and rho are comparable.
inline double solution_change(const Scenario& sc, const Allocation& a, const Allocation& b) {
    double diff = 0.0, norm = 0.0;
    const auto add = [&](double x, double y, double width) {
        diff += (x - y) * (x - y) / (width * width);
        norm += x * x / (width * width);
    };
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& d = sc.devices[n];
        add(a.power[n], b.power[n], d.p_max);
        add(a.bandwidth[n], b.bandwidth[n], sc.system.total_bandwidth);
        add(a.freq_device[n], b.freq_device[n], d.f_max);
        add(a.freq_bs[n], b.freq_bs[n], d.h_max);
        add(a.rho[n], b.rho[n], d.rho_max);
    }
    return norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
}

/// Runs the alternating loop from a given feasible point.
inline SolveResult solve_from(const Scenario& sc, const OptimizerConfig& cfg, Allocation start) {
    cfg.validate();
    const std::size_t n_dev = sc.size();
    SolveResult best;
    best.allocation = start;
    best.report = consumption(sc, start);
    best.allocation.deadline = best.report.t_max;
    best.trace.initial_objective = best.report.objective;

    SolveTrace trace;
    trace.initial_objective = best.report.objective;
    Allocation cur = best.allocation;
    std::vector<double> t_cmp(n_dev), t_bs(n_dev);
    for (int k = 1; k <= cfg.max_outer; ++k) {
        P3Solution s3;
        try {
            s3 = solve_p3(sc, cur.power, cur.bandwidth, cfg.p3);
        } catch (const Error& e) {
            throw SolveFailure(k, "rho/frequency step", e.what());
        }
        Allocation half = cur;
        half.freq_device = s3.freq_device;
        half.freq_bs = s3.freq_bs;
        half.rho = s3.rho;
        half.deadline = s3.deadline;
        const ConsumptionReport half_rep = consumption(sc, half);
        if (half_rep.objective < best.report.objective) {
            best.allocation = half;
            best.report = half_rep;
        }

        for (std::size_t n = 0; n < n_dev; ++n) {
            const auto& d = sc.devices[n];
            t_cmp[n] = compute_time(d.cycles_device, d.samples, s3.freq_device[n]);
            t_bs[n] = compute_time(d.cycles_bs, d.samples, s3.freq_bs[n]);
        }
        P4Solution s4;
        try {
            s4 = solve_p4(sc, s3.rho, t_cmp, t_bs, s3.deadline, cfg.newton, cur.power, cur.bandwidth);
        } catch (const Error& e) {
            throw SolveFailure(k, "power/bandwidth step", e.what());
        }
        Allocation next = half;
        next.power = s4.power;
        next.bandwidth = s4.bandwidth;
        next.deadline = consumption(sc, next).t_max;
        if (cfg.rebalance_uplink) {
            const ConsumptionReport mid = consumption(sc, next);
            if (mid.objective < best.report.objective) {
                best.allocation = next;
                best.report = mid;
            }
            TimeSplitSolution ts;
            try {
                ts = solve_time_split(sc, next.bandwidth, next.rho);
            } catch (const Error& e) {
                throw SolveFailure(k, "uplink time step", e.what());
            }
            next.power = ts.power;
            next.freq_device = ts.freq_device;
            next.freq_bs = ts.freq_bs;
        }
        const ConsumptionReport rep = consumption(sc, next);
        next.deadline = rep.t_max;

        TraceEntry te;
        te.objective = rep.objective;
        te.deadline = rep.t_max;
        te.uplink_energy = s4.energy;
        te.change = solution_change(sc, cur, next);
        te.newton_iterations = s4.iterations;
        te.newton_converged = s4.converged();
        te.used_fallback = s4.used_fallback;
        trace.iterations.push_back(te);
        trace.outer_iterations = k;

        if (rep.objective < best.report.objective) {
            best.allocation = next;
            best.report = rep;
        }
        cur = next;
        if (te.change <= cfg.eps_outer) {
            trace.converged = true;
            break;
        }
    }
    trace.best_objective = best.report.objective;
    best.trace = trace;
    return best;
}

/// Starting points for the multi-start policy: the average allocation, then full power.
inline std::vector<std::pair<std::string, Allocation>> starting_points(const Scenario& sc,
                                                                      InitialPointPolicy policy) {
    std::vector<std::pair<std::string, Allocation>> out;
    out.emplace_back("average", initial_feasible_point(sc));
    if (policy == InitialPointPolicy::MultiStart) {
        Allocation a = out.front().second;
        for (std::size_t n = 0; n < sc.size(); ++n) a.power[n] = sc.devices[n].p_max;
        if (lift_rho(sc, a)) out.emplace_back("full-power", a);
    }
    return out;
}

inline SolveResult solve(const Scenario& sc, const OptimizerConfig& cfg = {}) {
    sc.validate();
    SolveResult best;
    bool have = false;
    for (auto& [name, start] : starting_points(sc, cfg.initial_point_policy)) {
        SolveResult r = solve_from(sc, cfg, std::move(start));
        r.trace.start = name;
        if (!have || r.report.objective < best.report.objective) {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

}  // namespace semcom
