#pragma once

// Subproblem in (rho, f, h, deadline) for fixed power and bandwidth.
//
// rho is set to the smallest value meeting the PSNR floor. For the remaining convex
// problem in (f, h, T), stationarity gives f = h = cbrt(beta / (2 w2 kappa)) clamped at
// f_max / h_max, every device's time equals T, and the multipliers beta_n(T) must sum to w1.
// beta_n(T) is closed-form in each clamping regime; T is found by bisection on sum(beta) = w1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "semcom/core_model.hpp"

namespace semcom {

struct P3Options {
    double rel_tol = 1e-15;  // on the deadline
    int max_iter = 200;
};

struct P3Solution {
    std::vector<double> rho;
    std::vector<double> freq_device;
    std::vector<double> freq_bs;
    std::vector<double> beta;
    std::vector<double> alpha;  // multiplier of f <= f_max
    std::vector<double> tau;    // multiplier of h <= h_max
    std::vector<double> t_up;   // uplink time at the chosen rho
    double deadline = 0.0;
    int iterations = 0;
};

/// max(rho_bar(p, B), rho_min), where rho_bar solves P(rho_bar, S(p, B)) = P_min.
inline double min_feasible_rho(const PsnrModel& model, const DeviceProfile& dev, double power, double bandwidth,
                               double noise_psd, std::size_t device_index = 0) {
    const double s = snr(power, bandwidth, dev.gain, noise_psd);
    const double rho_bar = model.inverse_rho(dev.psnr_min, s);
    if (rho_bar > dev.rho_max) throw InfeasibleRho(device_index, rho_bar, dev.rho_max);
    return std::max(rho_bar, dev.rho_min);
}

/// Unclamped optimal frequency cbrt(beta / (2 w2 kappa)) for either CPU.
inline double candidate_frequency(double beta, double weight_energy, double kappa) {
    if (!(weight_energy > 0.0)) throw DegenerateWeights("candidate_frequency: weight_energy must be > 0");
    if (!(beta >= 0.0)) throw DomainError("candidate_frequency: beta must be >= 0");
    return std::cbrt(beta / (2.0 * weight_energy * kappa));
}

/// Smallest achievable round time: both CPUs at their maxima.
inline double device_time_floor(const DeviceProfile& dev, double t_up) {
    return t_up + dev.cycles_device * dev.samples / dev.f_max + dev.cycles_bs * dev.samples / dev.h_max;
}

/// Round time of a device when both frequencies follow beta (clamped).
inline double device_time_at_beta(const DeviceProfile& dev, double t_up, double beta, double weight_energy,
                                  double kappa) {
    const double u = candidate_frequency(beta, weight_energy, kappa);
    return t_up + dev.cycles_device * dev.samples / std::min(u, dev.f_max) +
           dev.cycles_bs * dev.samples / std::min(u, dev.h_max);
}

/// The unique beta > 0 whose clamped frequencies make the device finish exactly at the deadline.
inline double beta_of_deadline(const DeviceProfile& dev, double t_up, double deadline, double weight_energy,
                               double kappa) {
    if (!(weight_energy > 0.0)) throw DegenerateWeights("beta_of_deadline: weight_energy must be > 0");
    const double k1 = dev.cycles_device * dev.samples;
    const double k2 = dev.cycles_bs * dev.samples;
    if (!(deadline > device_time_floor(dev, t_up))) {
        throw DeadlineInfeasible("beta_of_deadline: deadline at or below the device time floor");
    }
    const double slack = deadline - t_up;
    // Neither clamps: T = t_up + (k1 + k2) / u.
    double u = (k1 + k2) / slack;
    if (u > std::min(dev.f_max, dev.h_max)) {
        // The CPU with the smaller maximum is pinned there; solve for the other.
        u = dev.f_max <= dev.h_max ? k2 / (slack - k1 / dev.f_max) : k1 / (slack - k2 / dev.h_max);
    }
    return 2.0 * weight_energy * kappa * u * u * u;
}

inline P3Solution solve_p3(const Scenario& sc, std::span<const double> power, std::span<const double> bandwidth,
                           const P3Options& opt = {}) {
    const std::size_t n_dev = sc.size();
    if (power.size() != n_dev || bandwidth.size() != n_dev) throw DomainError("solve_p3: dimension mismatch");
    const double w1 = sc.system.weight_time;
    const double w2 = sc.system.weight_energy;
    const double kappa = sc.system.kappa;
    if (!(w1 > 0.0)) throw DegenerateWeights("solve_p3: weight_time must be > 0");

    P3Solution sol;
    sol.rho.resize(n_dev);
    sol.t_up.resize(n_dev);
    std::vector<double> floors(n_dev);
    double t_lo = 0.0;
    for (std::size_t n = 0; n < n_dev; ++n) {
        const auto& d = sc.devices[n];
        if (!(power[n] > 0.0 && power[n] <= d.p_max * (1.0 + 1e-12) && bandwidth[n] > 0.0)) {
            throw DomainError("solve_p3: power/bandwidth out of bounds for device " + std::to_string(n));
        }
        sol.rho[n] = min_feasible_rho(sc.psnr_model, d, power[n], bandwidth[n], sc.system.noise_psd, n);
        sol.t_up[n] = d.payload_bits(sol.rho[n]) / uplink_rate(power[n], bandwidth[n], d.gain, sc.system.noise_psd);
        floors[n] = device_time_floor(d, sol.t_up[n]);
        t_lo = std::max(t_lo, floors[n]);
    }

    sol.beta.assign(n_dev, 0.0);
    sol.alpha.assign(n_dev, 0.0);
    sol.tau.assign(n_dev, 0.0);
    sol.freq_device.resize(n_dev);
    sol.freq_bs.resize(n_dev);

    if (w2 == 0.0) {
        // Energy is free: run every CPU flat out and put all of w1 on the bottleneck devices.
        sol.deadline = t_lo;
        std::vector<std::size_t> binding;
        for (std::size_t n = 0; n < n_dev; ++n) {
            if (floors[n] >= t_lo * (1.0 - 1e-12)) binding.push_back(n);
        }
        for (std::size_t n = 0; n < n_dev; ++n) {
            const auto& d = sc.devices[n];
            sol.freq_device[n] = d.f_max;
            sol.freq_bs[n] = d.h_max;
        }
        for (std::size_t n : binding) {
            const auto& d = sc.devices[n];
            sol.beta[n] = w1 / static_cast<double>(binding.size());
            sol.alpha[n] = sol.beta[n] * d.cycles_device * d.samples / (d.f_max * d.f_max);
            sol.tau[n] = sol.beta[n] * d.cycles_bs * d.samples / (d.h_max * d.h_max);
        }
        return sol;
    }

    auto beta_sum = [&](double t) {
        double s = 0.0;
        for (std::size_t n = 0; n < n_dev; ++n) {
            if (!(t > floors[n])) return std::numeric_limits<double>::infinity();
            s += beta_of_deadline(sc.devices[n], sol.t_up[n], t, w2, kappa);
        }
        return s;
    };

    double lo = t_lo;
    double hi = 2.0 * t_lo;
    double prev = beta_sum(hi);
    for (int k = 0; prev > w1; ++k) {
        if (k > 2000) throw BracketingFailure("solve_p3: no upper deadline bracket", prev - w1);
        lo = hi;
        hi *= 2.0;
        const double cur = beta_sum(hi);
        if (!(cur < prev)) throw BracketingFailure("solve_p3: sum of beta not decreasing in the deadline", cur - w1);
        prev = cur;
    }

    int it = 0;
    for (; it < opt.max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi) || hi - lo <= opt.rel_tol * hi) break;
        if (beta_sum(mid) > w1) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    sol.iterations = it;
    const double s_lo = beta_sum(lo);
    const double s_hi = beta_sum(hi);
    sol.deadline = std::abs(s_lo - w1) < std::abs(s_hi - w1) ? lo : hi;

    for (std::size_t n = 0; n < n_dev; ++n) {
        const auto& d = sc.devices[n];
        const double beta = beta_of_deadline(d, sol.t_up[n], sol.deadline, w2, kappa);
        const double u = candidate_frequency(beta, w2, kappa);
        const double k1 = d.cycles_device * d.samples;
        const double k2 = d.cycles_bs * d.samples;
        sol.beta[n] = beta;
        sol.freq_device[n] = std::min(u, d.f_max);
        sol.freq_bs[n] = std::min(u, d.h_max);
        if (u > d.f_max) sol.alpha[n] = beta * k1 / (d.f_max * d.f_max) - 2.0 * w2 * kappa * k1 * d.f_max;
        if (u > d.h_max) sol.tau[n] = beta * k2 / (d.h_max * d.h_max) - 2.0 * w2 * kappa * k2 * d.h_max;
    }
    return sol;
}

}  // namespace semcom
