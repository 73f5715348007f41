#pragma once

// Reference policies compared against the full solver.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "semcom/core_model.hpp"
#include "semcom/optimizer.hpp"
#include "semcom/rng.hpp"

namespace semcom {

enum class BaselineKind { RandomAllocation, AverageAllocation, OptimizePBOnly, OptimizeFHRhoOnly };

inline constexpr BaselineKind kAllBaselines[] = {BaselineKind::RandomAllocation, BaselineKind::AverageAllocation,
                                                 BaselineKind::OptimizePBOnly, BaselineKind::OptimizeFHRhoOnly};

inline std::string_view to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::RandomAllocation: return "random_allocation";
        case BaselineKind::AverageAllocation: return "average_allocation";
        case BaselineKind::OptimizePBOnly: return "optimize_pb_only";
        case BaselineKind::OptimizeFHRhoOnly: return "optimize_fhrho_only";
    }
    return "unknown";
}

inline BaselineKind baseline_from_string(std::string_view s) {
    for (BaselineKind k : kAllBaselines) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown baseline '" + std::string(s) + "'");
}

struct RandomOptions {
    double sigma_fraction = 0.1;    // normal spread as a fraction of each box width
    double bandwidth_spread = 1.0;  // 1 draws B_n from [B/(1.25N), B/(0.8N)], 0 gives B/N
    int max_attempts = 100;
};

/// Truncated-normal draws around the box midpoints, bandwidths rescaled to fill the band exactly,
/// rho lifted for the PSNR floor. Redraws when even rho_max is not enough.
inline Allocation random_allocation(const Scenario& sc, std::uint64_t seed, const RandomOptions& opt = {}) {
    const std::size_t n_dev = sc.size();
    const double b_total = sc.system.total_bandwidth;
    const double nd = static_cast<double>(n_dev);
    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        Allocation a = Allocation::sized(n_dev);
        double b_sum = 0.0;
        for (std::size_t n = 0; n < n_dev; ++n) {
            const auto& d = sc.devices[n];
            CounterRng rng(seed, streams::kRandomBaseline + (static_cast<std::uint64_t>(attempt) << 20) + n);
            const double s = opt.sigma_fraction;
            a.power[n] = rng.truncated_normal(d.p_max / 2.0, s * d.p_max, 0.0, d.p_max);
            a.freq_device[n] = rng.truncated_normal(d.f_max / 2.0, s * d.f_max, 0.0, d.f_max);
            a.freq_bs[n] = rng.truncated_normal(d.h_max / 2.0, s * d.h_max, 0.0, d.h_max);
            const double mid = 0.5 * (d.rho_min + d.rho_max);
            a.rho[n] = rng.truncated_normal(mid, s * (d.rho_max - d.rho_min), d.rho_min, d.rho_max);
            const double b_mid = b_total / nd;
            const double lo = b_mid + opt.bandwidth_spread * (b_total / (1.25 * nd) - b_mid);
            const double hi = b_mid + opt.bandwidth_spread * (b_total / (0.8 * nd) - b_mid);
            a.bandwidth[n] = rng.uniform(lo, hi);
            b_sum += a.bandwidth[n];
        }
        for (double& b : a.bandwidth) b *= b_total / b_sum;
        bool positive = true;
        for (std::size_t n = 0; n < n_dev; ++n) {
            positive = positive && a.power[n] > 0.0 && a.freq_device[n] > 0.0 && a.freq_bs[n] > 0.0;
        }
        if (positive && lift_rho(sc, a)) return a;
    }
    throw ScenarioInfeasible("random allocation: no feasible draw within the attempt limit");
}

/// f, h and rho at the average allocation; deadline from that point; then the (p, B) step.
inline Allocation optimize_pb_only(const Scenario& sc, const OptimizerConfig& cfg = {}) {
    Allocation a = average_allocation(sc);
    const ConsumptionReport rep = consumption(sc, a);
    const P4Solution s4 = solve_p4(sc, a.rho, rep.t_cmp, rep.t_bs, rep.t_max, cfg.newton, a.power, a.bandwidth);
    a.power = s4.power;
    a.bandwidth = s4.bandwidth;
    a.deadline = consumption(sc, a).t_max;
    return a;
}

/// p and B at the average allocation; one (rho, f, h, deadline) step.
inline Allocation optimize_fhrho_only(const Scenario& sc, const OptimizerConfig& cfg = {}) {
    Allocation a = average_allocation(sc);
    const P3Solution s3 = solve_p3(sc, a.power, a.bandwidth, cfg.p3);
    a.freq_device = s3.freq_device;
    a.freq_bs = s3.freq_bs;
    a.rho = s3.rho;
    a.deadline = s3.deadline;
    return a;
}

inline Allocation run_baseline(BaselineKind k, const Scenario& sc, std::uint64_t seed, const OptimizerConfig& cfg = {}) {
    Allocation a;
    switch (k) {
        case BaselineKind::RandomAllocation: a = random_allocation(sc, seed); break;
        case BaselineKind::AverageAllocation: a = average_allocation(sc); break;
        case BaselineKind::OptimizePBOnly: a = optimize_pb_only(sc, cfg); break;
        case BaselineKind::OptimizeFHRhoOnly: a = optimize_fhrho_only(sc, cfg); break;
    }
    if (!a.deadline) a.deadline = consumption(sc, a).t_max;
    return a;
}

}  // namespace semcom
