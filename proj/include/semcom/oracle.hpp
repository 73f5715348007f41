#pragma once

// Brute-force grid search for tiny instances and a numerical concavity check of the rate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "semcom/core_model.hpp"
#include "semcom/kkt.hpp"
#include "semcom/rng.hpp"

namespace semcom::oracle {

/// `points` log-spaced values on [hi / 100, hi]. Refining from G to 2G - 1 points keeps every old value.
inline std::vector<double> log_grid(double hi, int points) {
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) {
        v[i] = hi * std::pow(10.0, -2.0 + 2.0 * i / (points - 1));
    }
    v.back() = hi;
    return v;
}

inline std::vector<double> linear_grid(double lo, double hi, int points) {
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) v[i] = lo + (hi - lo) * i / (points - 1);
    v.back() = hi;
    return v;
}

struct GridResult {
    Allocation allocation;
    double objective = 0.0;
    std::uint64_t evaluated = 0;
    std::uint64_t feasible = 0;
};

namespace detail {

struct FrontPoint {
    double t;
    double e;
    int ip, ir, jf, jh;
};

// Non-dominated (time, energy) pairs of one device at a fixed bandwidth, sorted by time
// with strictly decreasing energy.
inline std::vector<FrontPoint> device_front(const Scenario& sc, std::size_t n, double bw, const std::vector<double>& pg,
                                            const std::vector<double>& rg, const std::vector<double>& fg,
                                            const std::vector<double>& hg, GridResult& stats) {
    const auto& d = sc.devices[n];
    const double kappa = sc.system.kappa;
    std::vector<FrontPoint> pts;
    std::vector<double> tf(fg.size()), ef(fg.size()), th(hg.size()), eh(hg.size());
    for (std::size_t j = 0; j < fg.size(); ++j) {
        tf[j] = compute_time(d.cycles_device, d.samples, fg[j]);
        ef[j] = compute_energy(kappa, d.cycles_device, d.samples, fg[j]);
    }
    for (std::size_t j = 0; j < hg.size(); ++j) {
        th[j] = compute_time(d.cycles_bs, d.samples, hg[j]);
        eh[j] = compute_energy(kappa, d.cycles_bs, d.samples, hg[j]);
    }
    for (std::size_t ip = 0; ip < pg.size(); ++ip) {
        const double s = snr(pg[ip], bw, d.gain, sc.system.noise_psd);
        const double r = uplink_rate(pg[ip], bw, d.gain, sc.system.noise_psd);
        for (std::size_t ir = 0; ir < rg.size(); ++ir) {
            stats.evaluated += fg.size() * hg.size();
            if (sc.psnr_model(rg[ir], s) < d.psnr_min) continue;
            stats.feasible += fg.size() * hg.size();
            const double t_up = d.payload_bits(rg[ir]) / r;
            const double e_up = pg[ip] * t_up;
            for (std::size_t jf = 0; jf < fg.size(); ++jf) {
                for (std::size_t jh = 0; jh < hg.size(); ++jh) {
                    pts.push_back({t_up + tf[jf] + th[jh], e_up + ef[jf] + eh[jh], static_cast<int>(ip),
                                   static_cast<int>(ir), static_cast<int>(jf), static_cast<int>(jh)});
                }
            }
        }
    }
    std::sort(pts.begin(), pts.end(), [](const FrontPoint& a, const FrontPoint& b) {
        return a.t < b.t || (a.t == b.t && a.e < b.e);
    });
    std::vector<FrontPoint> front;
    for (const auto& q : pts) {
        if (front.empty() || q.e < front.back().e) front.push_back(q);
    }
    return front;
}

// All compositions of `total` into `parts` positive integers.
inline void compositions(int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (parts == 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int k = 1; k <= total - (parts - 1); ++k) {
        cur.push_back(k);
        compositions(total - k, parts - 1, cur, out);
        cur.pop_back();
    }
}

}  // namespace detail

/// Exhaustive search over a Cartesian grid of (p, rho, f, h) per device and bandwidth splits on
/// multiples of B_total / (points - 1) that use the whole band.
inline GridResult grid_search(const Scenario& sc, int points) {
    const std::size_t n_dev = sc.size();
    if (n_dev < 1 || n_dev > 3) throw DomainError("grid_search: supports 1 to 3 devices");
    if (points < 10) throw DomainError("grid_search: need at least 10 points per dimension");
    const int steps = points - 1;
    if (static_cast<int>(n_dev) > steps) throw DomainError("grid_search: too few bandwidth steps");
    const double w1 = sc.system.weight_time;
    const double w2 = sc.system.weight_energy;
    const double b_step = sc.system.total_bandwidth / steps;

    std::vector<std::vector<double>> pg(n_dev), rg(n_dev), fg(n_dev), hg(n_dev);
    for (std::size_t n = 0; n < n_dev; ++n) {
        const auto& d = sc.devices[n];
        pg[n] = log_grid(d.p_max, points);
        rg[n] = linear_grid(d.rho_min, d.rho_max, points);
        fg[n] = log_grid(d.f_max, points);
        hg[n] = log_grid(d.h_max, points);
    }

    GridResult res;
    // fronts[n][k]: front of device n with k bandwidth steps.
    std::vector<std::vector<std::vector<detail::FrontPoint>>> fronts(n_dev);
    for (std::size_t n = 0; n < n_dev; ++n) {
        fronts[n].resize(steps + 1);
        for (int k = 1; k <= steps - static_cast<int>(n_dev) + 1; ++k) {
            fronts[n][k] = detail::device_front(sc, n, k * b_step, pg[n], rg[n], fg[n], hg[n], res);
        }
    }

    std::vector<std::vector<int>> splits;
    std::vector<int> cur;
    detail::compositions(steps, static_cast<int>(n_dev), cur, splits);

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_split;
    std::vector<std::size_t> best_idx(n_dev);
    for (const auto& split : splits) {
        std::vector<const std::vector<detail::FrontPoint>*> fr(n_dev);
        bool empty = false;
        for (std::size_t n = 0; n < n_dev; ++n) {
            fr[n] = &fronts[n][split[n]];
            if (fr[n]->empty()) empty = true;
        }
        if (empty) continue;
        // Sweep a common deadline over every front time; each device takes its cheapest point in time.
        std::vector<double> ts;
        for (std::size_t n = 0; n < n_dev; ++n) {
            for (const auto& q : *fr[n]) ts.push_back(q.t);
        }
        std::sort(ts.begin(), ts.end());
        double t_floor = 0.0;
        for (std::size_t n = 0; n < n_dev; ++n) t_floor = std::max(t_floor, fr[n]->front().t);
        std::vector<std::size_t> idx(n_dev, 0);
        for (double t : ts) {
            if (t < t_floor) continue;
            double e = 0.0;
            double t_max = 0.0;
            for (std::size_t n = 0; n < n_dev; ++n) {
                while (idx[n] + 1 < fr[n]->size() && (*fr[n])[idx[n] + 1].t <= t) ++idx[n];
                e += (*fr[n])[idx[n]].e;
                t_max = std::max(t_max, (*fr[n])[idx[n]].t);
            }
            const double obj = w1 * t_max + w2 * e;
            if (obj < best) {
                best = obj;
                best_split = split;
                best_idx = idx;
            }
        }
    }
    if (best_split.empty()) throw ScenarioInfeasible("grid_search: no feasible grid point");

    res.allocation = Allocation::sized(n_dev);
    for (std::size_t n = 0; n < n_dev; ++n) {
        const auto& q = fronts[n][best_split[n]][best_idx[n]];
        res.allocation.power[n] = pg[n][q.ip];
        res.allocation.rho[n] = rg[n][q.ir];
        res.allocation.freq_device[n] = fg[n][q.jf];
        res.allocation.freq_bs[n] = hg[n][q.jh];
        res.allocation.bandwidth[n] = best_split[n] * b_step;
    }
    const ConsumptionReport rep = consumption(sc, res.allocation);
    res.allocation.deadline = rep.t_max;
    res.objective = rep.objective;
    return res;
}

struct ConcavityReport {
    std::size_t samples = 0;
    std::size_t sign_failures = 0;         // second directional derivative above 1e-9 |r|
    std::size_t closed_form_failures = 0;  // finite difference vs closed form beyond 1e-6
    double worst_sign_ratio = -std::numeric_limits<double>::infinity();  // max of D2 / |r|
    double worst_closed_form_error = 0.0;

    bool passed() const noexcept { return sign_failures == 0 && closed_form_failures == 0; }
};

/// Quadratic form of the rate Hessian at (p, B) along (x1, x2):
/// -(x1 B - x2 p)^2 g^2 / (B^3 N0^2 (1 + S)^2 ln 2).
inline double rate_hessian_form(double p, double bw, double gain, double noise_psd, double x1, double x2) {
    const double s = p * gain / (noise_psd * bw);
    const double u = x1 * bw - x2 * p;
    return -(u * u) * gain * gain / (bw * bw * bw * noise_psd * noise_psd * (1.0 + s) * (1.0 + s) * kLn2);
}

/// Samples (p, B) with SNR log-uniform on [1e-2, 1e5] and B log-uniform on [1e4, 2e7], and a
/// random direction in coordinates scaled by (p, B). Checks that the central second difference
/// (step 1e-2) is non-positive up to 1e-9 |r|, and compares a Richardson-extrapolated second
/// difference in long double against rate_hessian_form. The comparison is relative to the
/// curvature scale g^2 (x1^2 B^2 + x2^2 p^2) / (B^3 N0^2 (1 + S)^2 ln 2), which stays meaningful
/// along the null direction x proportional to (p, B).
inline ConcavityReport concavity_check(double gain, double noise_psd, std::size_t samples, std::uint64_t seed = 0) {
    ConcavityReport rep;
    rep.samples = samples;
    CounterRng rng(seed, streams::kOracle);
    auto rate_ld = [&](long double p, long double b) {
        return b * std::log1p(p * static_cast<long double>(gain) / (static_cast<long double>(noise_psd) * b)) /
               std::numbers::ln2_v<long double>;
    };
    for (std::size_t i = 0; i < samples; ++i) {
        const double bw = std::pow(10.0, rng.uniform(4.0, std::log10(2e7)));
        const double s = std::pow(10.0, rng.uniform(-2.0, 5.0));
        const double p = s * noise_psd * bw / gain;
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double x1 = std::cos(angle) * p;
        const double x2 = std::sin(angle) * bw;

        const double r = uplink_rate(p, bw, gain, noise_psd);
        const double h = 1e-2;
        const double d2 = (uplink_rate(p + h * x1, bw + h * x2, gain, noise_psd) - 2.0 * r +
                           uplink_rate(p - h * x1, bw - h * x2, gain, noise_psd)) /
                          (h * h);
        const double ratio = d2 / std::abs(r);
        rep.worst_sign_ratio = std::max(rep.worst_sign_ratio, ratio);
        if (ratio > 1e-9) ++rep.sign_failures;

        auto second_diff = [&](long double step) {
            const long double pl = p, bl = bw;
            return (rate_ld(pl + step * x1, bl + step * x2) - 2.0L * rate_ld(pl, bl) +
                    rate_ld(pl - step * x1, bl - step * x2)) /
                   (step * step);
        };
        const long double hl = 2e-3L;
        const long double rich = (4.0L * second_diff(hl / 2) - second_diff(hl)) / 3.0L;
        const double q = rate_hessian_form(p, bw, gain, noise_psd, x1, x2);
        const double scale = gain * gain * (x1 * x1 * bw * bw + x2 * x2 * p * p) /
                             (bw * bw * bw * noise_psd * noise_psd * (1.0 + s) * (1.0 + s) * kLn2);
        const double err = std::abs(static_cast<double>(rich) - q) / scale;
        rep.worst_closed_form_error = std::max(rep.worst_closed_form_error, err);
        if (err > 1e-6) ++rep.closed_form_failures;
    }
    return rep;
}

}  // namespace semcom::oracle
