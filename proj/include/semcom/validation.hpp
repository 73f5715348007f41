#pragma once

// Seeded certification suites shared by the `validate` subcommand and the acceptance tests.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "semcom/kkt.hpp"
#include "semcom/optimizer.hpp"
#include "semcom/oracle.hpp"
#include "semcom/p3_solver.hpp"
#include "semcom/p4_solver.hpp"
#include "semcom/scenario.hpp"

namespace semcom::validation {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct P3Suite {
    std::size_t instances = 0;
    std::size_t failures = 0;
    double worst_kkt = 0.0;
    double worst_time_equality = 0.0;
    double worst_beta_sum = 0.0;
    double max_seconds = 0.0;
    std::vector<std::string> notes;

    bool passed() const noexcept { return instances > 0 && failures == 0; }
};

/// The frequency/rho block at the average allocation of each seeded scenario.
inline P3Suite run_p3_suite(ScenarioConfig base, std::uint64_t first_seed, std::size_t count,
                            const P3Options& opt = {}, double kkt_tol = 1e-6, double time_tol = 1e-6,
                            double beta_tol = 1e-9, double time_limit = 0.1) {
    P3Suite s;
    for (std::size_t i = 0; i < count; ++i) {
        base.seed = first_seed + i;
        const Scenario sc = sample_scenario(base);
        const Allocation a = average_allocation(sc);
        const auto t0 = Clock::now();
        const P3Solution sol = solve_p3(sc, a.power, a.bandwidth, opt);
        const double secs = seconds_since(t0);
        const oracle::KktReport k = oracle::kkt_residuals_p3(sc, a.power, a.bandwidth, sol);
        ++s.instances;
        s.worst_kkt = std::max(s.worst_kkt, k.worst());
        s.worst_time_equality = std::max(s.worst_time_equality, k.time_equality);
        s.worst_beta_sum = std::max(s.worst_beta_sum, k.beta_sum);
        s.max_seconds = std::max(s.max_seconds, secs);
        if (!(k.worst() <= kkt_tol && k.time_equality <= time_tol && k.beta_sum <= beta_tol && secs <= time_limit)) {
            ++s.failures;
            s.notes.push_back("seed " + std::to_string(base.seed));
        }
    }
    return s;
}

struct P4Suite {
    std::size_t instances = 0;
    std::size_t converged = 0;  // scaled phi norm within tolerance inside the iteration cap
    std::size_t fallbacks = 0;
    double worst_fixed_point = 0.0;  // over converged instances
    double worst_primal = 0.0;       // over all instances
    double max_phi = 0.0;
    double mean_iterations = 0.0;

    double converged_fraction() const noexcept {
        return instances ? static_cast<double>(converged) / static_cast<double>(instances) : 0.0;
    }
};

/// Worst relative violation of the constraints the power/bandwidth block must respect.
inline double p4_primal_violation(const Scenario& sc, const P4Floors& floors, std::span<const double> power,
                                  std::span<const double> bandwidth) {
    double worst = 0.0, b_sum = 0.0;
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& d = sc.devices[n];
        const double p = power[n], b = bandwidth[n];
        if (!(p > 0.0 && b > 0.0)) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, (p - d.p_max) / d.p_max);
        const double r = uplink_rate(p, b, d.gain, sc.system.noise_psd);
        if (floors.rate[n] > 0.0) worst = std::max(worst, (floors.rate[n] - r) / floors.rate[n]);
        if (floors.snr[n] > 0.0) {
            worst = std::max(worst, (floors.snr[n] - snr(p, b, d.gain, sc.system.noise_psd)) / floors.snr[n]);
        }
        b_sum += b;
    }
    return std::max({0.0, worst, (b_sum - sc.system.total_bandwidth) / sc.system.total_bandwidth});
}

/// The power/bandwidth block after one frequency/rho step from the average allocation.
inline P4Suite run_p4_suite(ScenarioConfig base, std::uint64_t first_seed, std::size_t count,
                            const OptimizerConfig& cfg = {}, double phi_tol = 1e-6) {
    P4Suite s;
    double iters = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        base.seed = first_seed + i;
        const Scenario sc = sample_scenario(base);
        const Allocation a = average_allocation(sc);
        const P3Solution s3 = solve_p3(sc, a.power, a.bandwidth, cfg.p3);
        std::vector<double> t_cmp(sc.size()), t_bs(sc.size());
        for (std::size_t n = 0; n < sc.size(); ++n) {
            const auto& d = sc.devices[n];
            t_cmp[n] = compute_time(d.cycles_device, d.samples, s3.freq_device[n]);
            t_bs[n] = compute_time(d.cycles_bs, d.samples, s3.freq_bs[n]);
        }
        const P4Floors floors = compute_p4_floors(sc, s3.rho, t_cmp, t_bs, s3.deadline);
        const P4Solution s4 = solve_p4(sc, s3.rho, t_cmp, t_bs, s3.deadline, cfg.newton, a.power, a.bandwidth);
        ++s.instances;
        iters += s4.iterations;
        if (s4.used_fallback) ++s.fallbacks;
        s.worst_primal = std::max(s.worst_primal, p4_primal_violation(sc, floors, s4.power, s4.bandwidth));
        const bool ok = !s4.used_fallback && s4.iterations <= cfg.newton.max_iter && s4.phi_norm <= phi_tol;
        if (ok) {
            ++s.converged;
            s.max_phi = std::max(s.max_phi, s4.phi_norm);
            s.worst_fixed_point = std::max(
                s.worst_fixed_point, oracle::fixed_point_residual(sc, s3.rho, s4.power, s4.bandwidth, s4.aux));
        }
    }
    s.mean_iterations = s.instances ? iters / static_cast<double>(s.instances) : 0.0;
    return s;
}

struct OracleCase {
    std::uint64_t seed = 0;
    double solver = 0.0;
    double grid = 0.0;
    double gap = 0.0;  // (solver - grid) / grid
    std::string error;
};

struct OracleSuite {
    std::vector<OracleCase> cases;
    double worst_gap = -std::numeric_limits<double>::infinity();
    std::size_t failures = 0;
    double seconds = 0.0;

    bool passed() const noexcept { return !cases.empty() && failures == 0; }
};

/// Full solver against exhaustive grid search on small seeded scenarios.
inline OracleSuite run_oracle_suite(ScenarioConfig base, std::uint64_t first_seed, std::size_t trials, int points,
                                    const OptimizerConfig& cfg = {}, double gap_tol = 0.02) {
    OracleSuite s;
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < trials; ++i) {
        base.seed = first_seed + i;
        OracleCase c;
        c.seed = base.seed;
        try {
            const Scenario sc = sample_scenario(base);
            c.solver = solve(sc, cfg).report.objective;
            c.grid = oracle::grid_search(sc, points).objective;
            c.gap = (c.solver - c.grid) / c.grid;
            s.worst_gap = std::max(s.worst_gap, c.gap);
            if (c.gap > gap_tol) ++s.failures;
        } catch (const std::exception& e) {
            c.error = e.what();
            ++s.failures;
        }
        s.cases.push_back(c);
    }
    s.seconds = seconds_since(t0);
    return s;
}

}  // namespace semcom::validation
