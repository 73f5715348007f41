#pragma once

// Block in (p, f, h, deadline) for fixed bandwidth and rho.
//
// With B fixed, choosing the power is the same as choosing the uplink time tau, and the uplink
// energy e(tau) = c tau expm1(x), x = a ln2 / (B tau), c = N0 B / g, is convex and decreasing in
// tau. The block is therefore convex with the same structure as the frequency block: for a time
// price beta each device picks f = h = cbrt(beta / (2 w2 kappa)) (clamped) and the tau solving
// w2 e'(tau) + beta = 0, clamped to the power and SNR limits; the deadline makes the prices sum
// to w1. The stationarity equation in x, e^x (1 - x) - 1 = -beta / (w2 c), is solved with the
// principal branch of Lambert W.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "semcom/core_model.hpp"
#include "semcom/p4_solver.hpp"

namespace semcom {

struct TimeSplitSolution {
    std::vector<double> power;
    std::vector<double> freq_device;
    std::vector<double> freq_bs;
    std::vector<double> tau;  // uplink time
    std::vector<double> beta;
    double deadline = 0.0;
};

namespace detail {

struct SplitDevice {
    double a = 0, bw = 0, c = 0, k1 = 0, k2 = 0, f_max = 0, h_max = 0, p_max = 0;
    double tau_lo = 0, tau_hi = std::numeric_limits<double>::infinity();
    double w2 = 0, kappa = 0;

    // Positive root of e^x (1 - x) - 1 = -q.
    static double x_of_q(double q) {
        double x = 1.0 + boost::math::lambert_w0((q - 1.0) / std::numbers::e);
        if (!(x > 0.0)) x = std::sqrt(2.0 * q);
        for (int i = 0; i < 3; ++i) {
            const double step = (exp_one_minus_x_minus_one(x) + q) / (x * std::exp(x));
            x += step;
            if (std::abs(step) <= 1e-16 * x) break;
        }
        return x;
    }

    double tau_of_beta(double beta) const {
        const double q = beta / (w2 * c);
        const double x = x_of_q(q);
        return std::clamp(a * kLn2 / (bw * x), tau_lo, tau_hi);
    }

    double time_at(double beta) const {
        const double u = std::cbrt(beta / (2.0 * w2 * kappa));
        return tau_of_beta(beta) + k1 / std::min(u, f_max) + k2 / std::min(u, h_max);
    }

    double floor_time() const { return tau_lo + k1 / f_max + k2 / h_max; }

    double beta_of_deadline(double deadline) const {
        double lo = 1.0, hi = 1.0;
        while (time_at(lo) <= deadline) {
            lo *= 0.25;
            if (lo < 1e-300) return 0.0;
        }
        hi = lo;
        while (time_at(hi) > deadline) {
            hi *= 4.0;
            if (hi > 1e300) throw BracketingFailure("time split: no price meets the deadline", time_at(hi) - deadline);
        }
        lo = hi / 4.0;
        auto f = [&](double lb) { return time_at(std::exp(lb)) - deadline; };
        auto tol = [](double x, double y) { return std::abs(y - x) <= 1e-15 * std::max(1.0, std::abs(x)); };
        std::uintmax_t it = 200;
        const double fa = time_at(lo) - deadline;
        const double fb = time_at(hi) - deadline;
        if (fb == 0.0) return hi;
        const auto br = boost::math::tools::toms748_solve(f, std::log(lo), std::log(hi), fa, fb, tol, it);
        return std::exp(0.5 * (br.first + br.second));
    }
};

}  // namespace detail

inline TimeSplitSolution solve_time_split(const Scenario& sc, std::span<const double> bandwidth,
                                          std::span<const double> rho) {
    const std::size_t n_dev = sc.size();
    if (bandwidth.size() != n_dev || rho.size() != n_dev) throw DomainError("solve_time_split: dimension mismatch");
    const double w1 = sc.system.weight_time;
    const double w2 = sc.system.weight_energy;
    if (!(w1 > 0.0)) throw DegenerateWeights("solve_time_split: weight_time must be > 0");
    const double n0 = sc.system.noise_psd;

    std::vector<detail::SplitDevice> devs(n_dev);
    double t_lo = 0.0;
    for (std::size_t n = 0; n < n_dev; ++n) {
        const auto& d = sc.devices[n];
        auto& s = devs[n];
        s.a = d.payload_bits(rho[n]);
        s.bw = bandwidth[n];
        s.c = n0 * bandwidth[n] / d.gain;
        s.k1 = d.cycles_device * d.samples;
        s.k2 = d.cycles_bs * d.samples;
        s.f_max = d.f_max;
        s.h_max = d.h_max;
        s.p_max = d.p_max;
        s.w2 = w2;
        s.kappa = sc.system.kappa;
        s.tau_lo = s.a / uplink_rate(d.p_max, bandwidth[n], d.gain, n0);
        const double s_min = sc.psnr_model.inverse_snr(d.psnr_min, rho[n]);
        if (s_min > 0.0) s.tau_hi = s.a / (bandwidth[n] * std::log1p(s_min) / kLn2);
        if (s.tau_hi < s.tau_lo * (1.0 - 1e-12)) {
            throw RateFloorUnreachable(n, "SNR floor unreachable at p_max for the given bandwidth");
        }
        s.tau_hi = std::max(s.tau_hi, s.tau_lo);
        t_lo = std::max(t_lo, s.floor_time());
    }

    TimeSplitSolution sol;
    sol.power.resize(n_dev);
    sol.freq_device.resize(n_dev);
    sol.freq_bs.resize(n_dev);
    sol.tau.resize(n_dev);
    sol.beta.assign(n_dev, 0.0);

    auto finish = [&](std::size_t n, double tau) {
        const auto& s = devs[n];
        sol.tau[n] = tau;
        sol.power[n] = std::min(s.c * std::expm1(s.a * kLn2 / (s.bw * tau)), s.p_max);
    };

    if (w2 == 0.0) {
        sol.deadline = t_lo;
        for (std::size_t n = 0; n < n_dev; ++n) {
            sol.freq_device[n] = devs[n].f_max;
            sol.freq_bs[n] = devs[n].h_max;
            finish(n, devs[n].tau_lo);
        }
        return sol;
    }

    auto beta_sum = [&](double t) {
        double s = 0.0;
        for (const auto& d : devs) s += d.beta_of_deadline(t);
        return s;
    };
    double lo = t_lo * (1.0 + 1e-13);
    double hi = 2.0 * t_lo;
    while (beta_sum(hi) > w1) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12 * t_lo) throw BracketingFailure("solve_time_split: no upper deadline bracket", beta_sum(hi) - w1);
    }
    if (beta_sum(lo) <= w1) {
        sol.deadline = lo;
    } else {
        auto f = [&](double t) { return std::log(beta_sum(t) / w1); };
        auto tol = [](double x, double y) { return std::abs(y - x) <= 1e-15 * std::abs(x); };
        std::uintmax_t it = 200;
        const auto br = boost::math::tools::toms748_solve(f, lo, hi, tol, it);
        sol.deadline = br.second;
    }
    for (std::size_t n = 0; n < n_dev; ++n) {
        const auto& s = devs[n];
        const double beta = s.beta_of_deadline(sol.deadline);
        const double u = std::cbrt(beta / (2.0 * w2 * s.kappa));
        sol.beta[n] = beta;
        sol.freq_device[n] = std::min(u, s.f_max);
        sol.freq_bs[n] = std::min(u, s.h_max);
        finish(n, s.tau_of_beta(beta));
    }
    return sol;
}

}  // namespace semcom
