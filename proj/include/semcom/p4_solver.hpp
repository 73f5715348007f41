#pragma once

// Subproblem in (p, B) for fixed (rho, f, h, deadline): minimise the total uplink energy
// sum_n p_n a_n / r_n(p_n, B_n) subject to rate floors, SNR floors, p <= p_max, sum B <= B_total.
//
// The sum of ratios is handled parametrically. For fixed (gamma, delta) the surrogate
// sum_n gamma_n (a_n p_n - delta_n r_n) is convex and separable up to the bandwidth budget,
// and a damped Newton iteration drives (gamma, delta) to the fixed point
// gamma_n r_n = w2, delta_n r_n = a_n p_n.
//
// Inner solve. For a given bandwidth the optimal power is a clamp of the unconstrained
// stationary point between the floor power and p_max, which gives a convex value function
// V_n(B). Its right derivative is known per branch, so the bandwidth reply to a budget price
// zeta is the smallest B with V_n'(B) + zeta >= 0 (bisection), and zeta is bisected so that
// the replies fill the budget. Where V_n is linear the reply jumps; the budget is then closed
// by a convex combination of the replies on both sides of the final zeta bracket.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "semcom/core_model.hpp"
#include "semcom/kkt.hpp"
#include "semcom/p4_types.hpp"

namespace semcom {

/// Rate needed to upload the payload in the time left after computation.
inline double rate_floor(const DeviceProfile& dev, double rho, double t_cmp, double t_bs, double deadline) {
    const double slack = deadline - t_cmp - t_bs;
    if (!(slack > 0.0)) throw DeadlineExhausted("rate_floor: no time left for the uplink");
    return dev.payload_bits(rho) / slack;
}

inline double snr_floor(const PsnrModel& model, const DeviceProfile& dev, double rho) {
    return model.inverse_snr(dev.psnr_min, rho);
}

inline AuxiliaryState init_auxiliary(const Scenario& sc, std::span<const double> power,
                                     std::span<const double> bandwidth, std::span<const double> rho) {
    AuxiliaryState aux;
    aux.gamma.resize(sc.size());
    aux.delta.resize(sc.size());
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& d = sc.devices[n];
        const double r = uplink_rate(power[n], bandwidth[n], d.gain, sc.system.noise_psd);
        if (!(r > 0.0)) throw InfeasibleTransmission("init_auxiliary: zero rate");
        aux.gamma[n] = sc.system.weight_energy / r;
        aux.delta[n] = power[n] * d.payload_bits(rho[n]) / r;
    }
    return aux;
}

/// Residuals [phi1_0..phi1_{N-1}, phi2_0..phi2_{N-1}] with phi1 = delta r - p a and phi2 = gamma r - w2.
inline std::vector<double> phi_residual(const Scenario& sc, std::span<const double> power,
                                        std::span<const double> bandwidth, std::span<const double> rho,
                                        const AuxiliaryState& aux) {
    const std::size_t n_dev = sc.size();
    if (power.size() != n_dev || bandwidth.size() != n_dev || rho.size() != n_dev || aux.gamma.size() != n_dev ||
        aux.delta.size() != n_dev) {
        throw DomainError("phi_residual: dimension mismatch");
    }
    std::vector<double> phi(2 * n_dev);
    for (std::size_t n = 0; n < n_dev; ++n) {
        const auto& d = sc.devices[n];
        const double r = uplink_rate(power[n], bandwidth[n], d.gain, sc.system.noise_psd);
        phi[n] = -power[n] * d.payload_bits(rho[n]) + aux.delta[n] * r;
        phi[n_dev + n] = -sc.system.weight_energy + aux.gamma[n] * r;
    }
    return phi;
}

/// Euclidean norm of phi with phi1_n divided by p_n a_n and phi2_n by w2, so both blocks are unitless.
inline double scaled_phi_norm(const Scenario& sc, std::span<const double> power, std::span<const double> rho,
                              std::span<const double> phi) {
    const std::size_t n_dev = sc.size();
    const double w2 = sc.system.weight_energy;
    double acc = 0.0;
    for (std::size_t n = 0; n < n_dev; ++n) {
        const double s1 = phi[n] / (power[n] * sc.devices[n].payload_bits(rho[n]));
        const double s2 = w2 > 0.0 ? phi[n_dev + n] / w2 : 0.0;
        acc += s1 * s1 + s2 * s2;
    }
    return std::sqrt(acc);
}

inline double uplink_energy_sum(const Scenario& sc, std::span<const double> power, std::span<const double> bandwidth,
                                std::span<const double> rho) {
    double e = 0.0;
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& d = sc.devices[n];
        e += power[n] * d.payload_bits(rho[n]) / uplink_rate(power[n], bandwidth[n], d.gain, sc.system.noise_psd);
    }
    return e;
}

inline P4Floors compute_p4_floors(const Scenario& sc, std::span<const double> rho, std::span<const double> t_cmp,
                                  std::span<const double> t_bs, double deadline) {
    P4Floors fl;
    fl.rate.resize(sc.size());
    fl.snr.resize(sc.size());
    for (std::size_t n = 0; n < sc.size(); ++n) {
        fl.rate[n] = rate_floor(sc.devices[n], rho[n], t_cmp[n], t_bs[n], deadline);
        fl.snr[n] = snr_floor(sc.psnr_model, sc.devices[n], rho[n]);
    }
    return fl;
}

namespace detail {

// e^x (1 - x) - 1, accurate for small x.
inline double exp_one_minus_x_minus_one(double x) {
    if (std::abs(x) < 0.5) {
        // sum_{k >= 2} -(k - 1) x^k / k!
        double term = x;  // x^k / k! for k = 1
        double sum = 0.0;
        for (int k = 2; k < 40; ++k) {
            term *= x / k;
            const double add = -(k - 1) * term;
            sum += add;
            if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    return std::exp(x) * (1.0 - x) - 1.0;
}

/// One device of the convex surrogate with its bandwidth domain [b_lo, b_hi].
struct SurrogateDevice {
    double a = 0, g = 0, n0 = 0, p_max = 0, r_min = 0, s_min = 0, gamma = 0, delta = 0;
    double s_unc = 0;  // SNR of the unconstrained power minimiser
    double b_lo = 0;
    double b_hi = std::numeric_limits<double>::infinity();

    double p_rate(double b) const { return n0 * b * std::expm1(r_min * kLn2 / b) / g; }
    double p_rate_slope(double b) const { return n0 / g * exp_one_minus_x_minus_one(r_min * kLn2 / b); }
    double p_snr(double b) const { return s_min * n0 * b / g; }
    double p_floor(double b) const { return std::max(p_rate(b), p_snr(b)); }
    double p_unc(double b) const { return s_unc * n0 * b / g; }
    double power(double b) const { return std::min(std::max(p_unc(b), p_floor(b)), p_max); }

    /// Right derivative of V(B) = min_p gamma (a p - delta r(p, B)).
    double value_slope(double b) const {
        const double pu = p_unc(b);
        if (pu >= p_max) return -gamma * delta * rate_bandwidth_slope(p_max * g / (n0 * b));
        const double pr = p_rate(b);
        const double ps = p_snr(b);
        if (pu >= std::max(pr, ps)) return -gamma * delta * rate_bandwidth_slope(s_unc);
        if (pr > ps) return gamma * a * p_rate_slope(b);
        return gamma * (a * s_min * n0 / g - delta * std::log1p(s_min) / kLn2);
    }

    /// Smallest B in the domain with value_slope(B) + zeta >= 0 (infinity if none).
    double reply(double zeta, double b_total) const {
        if (value_slope(b_lo) + zeta >= 0.0) return b_lo;
        double hi;
        if (std::isfinite(b_hi)) {
            if (value_slope(b_hi) + zeta < 0.0) return b_hi;
            hi = b_hi;
        } else {
            hi = std::max(2.0 * b_lo, b_total);
            int k = 0;
            while (value_slope(hi) + zeta < 0.0) {
                hi *= 2.0;
                if (++k > 200) return std::numeric_limits<double>::infinity();
            }
        }
        // Bracketed root of the slope residual in log B; the residual is monotone but may jump.
        if (!(std::log(hi) > std::log(b_lo))) return hi;  // domain collapsed to a point
        auto resid = [&](double lb) { return value_slope(std::exp(lb)) + zeta; };
        auto close_enough = [](double x, double y) { return std::abs(y - x) <= 1e-14; };
        std::uintmax_t max_iter = 300;
        const auto br = boost::math::tools::toms748_solve(resid, std::log(b_lo), std::log(hi), value_slope(b_lo) + zeta,
                                                          value_slope(hi) + zeta, close_enough, max_iter);
        const double b_right = std::min(std::exp(br.second), hi);
        return value_slope(b_right) + zeta >= 0.0 ? b_right : hi;
    }
};

inline SurrogateDevice make_surrogate(const Scenario& sc, std::size_t n, double rho, double r_min, double s_min,
                                      double gamma, double delta) {
    const auto& d = sc.devices[n];
    SurrogateDevice s;
    s.a = d.payload_bits(rho);
    s.g = d.gain;
    s.n0 = sc.system.noise_psd;
    s.p_max = d.p_max;
    s.r_min = r_min;
    s.s_min = s_min;
    s.gamma = gamma;
    s.delta = delta;
    s.s_unc = std::max(0.0, delta * s.g / (s.a * s.n0 * kLn2) - 1.0);
    if (!(r_min > 0.0)) throw DomainError("surrogate: rate floor must be > 0");

    const double b_total = sc.system.total_bandwidth;
    const double r_sup = s.p_max * s.g / (s.n0 * kLn2);  // rate at p_max as B grows without bound
    if (!(r_min < r_sup)) throw RateFloorUnreachable(n, "rate floor exceeds the wideband limit at p_max");
    auto rate_at_pmax = [&](double b) { return b * std::log1p(s.p_max * s.g / (s.n0 * b)) / kLn2; };
    double hi = r_min;
    while (rate_at_pmax(hi) < r_min) hi *= 2.0;
    double lo = hi;
    while (rate_at_pmax(lo) >= r_min && lo > 1e-300) lo *= 0.5;
    for (int it = 0; it < 200 && hi > lo * (1.0 + 1e-15); ++it) {
        const double mid = std::sqrt(lo * hi);
        if (!(mid > lo && mid < hi)) break;
        if (rate_at_pmax(mid) >= r_min) hi = mid;
        else lo = mid;
    }
    s.b_lo = hi;
    if (s.b_lo > b_total * (1.0 + 1e-9)) {
        throw RateFloorUnreachable(n, "rate floor unreachable at B = B_total with p = p_max");
    }
    if (s_min > 0.0) {
        s.b_hi = s.p_max * s.g / (s.n0 * s_min);
        if (s.b_lo > s.b_hi * (1.0 + 1e-9)) {
            throw RateFloorUnreachable(n, "rate and SNR floors cannot be met together at p_max");
        }
        s.b_hi = std::max(s.b_hi, s.b_lo);
    }
    return s;
}

// Multipliers (eta, nu, iota) of one device by least squares over the active constraints.
inline std::array<double, 3> recover_multipliers(const SurrogateDevice& s, double p, double b, double zeta) {
    const double sn = p * s.g / (s.n0 * b);
    const double r = b * std::log1p(sn) / kLn2;
    const double c1 = b * s.g / ((s.n0 * b + p * s.g) * kLn2);
    const double c2 = rate_bandwidth_slope(sn);
    const double w = s.gamma * s.delta;

    const double row1 = std::max(s.gamma * s.a, w * c1);
    const double row2 = std::max({w * c2, zeta, 1e-300});
    // A x = rhs, columns ordered (eta, nu, iota).
    const double cols[3][2] = {{-c1 / row1, -c2 / row2}, {-s.g / row1, s.n0 * s.s_min / row2}, {1.0 / row1, 0.0}};
    const double rhs[2] = {(w * c1 - s.gamma * s.a) / row1, (w * c2 - zeta) / row2};

    const bool active[3] = {r <= s.r_min * (1.0 + 1e-9), s.s_min > 0.0 && sn <= s.s_min * (1.0 + 1e-9),
                            p >= s.p_max * (1.0 - 1e-9)};

    std::array<double, 3> best{0.0, 0.0, 0.0};
    double best_res = std::hypot(rhs[0], rhs[1]);
    auto consider = [&](const std::array<double, 3>& x) {
        double e0 = -rhs[0], e1 = -rhs[1];
        for (int k = 0; k < 3; ++k) {
            e0 += cols[k][0] * x[k];
            e1 += cols[k][1] * x[k];
        }
        const double res = std::hypot(e0, e1);
        if (res < best_res * (1.0 - 1e-12)) {
            best_res = res;
            best = x;
        }
    };
    for (int i = 0; i < 3; ++i) {
        if (!active[i]) continue;
        const double cc = cols[i][0] * cols[i][0] + cols[i][1] * cols[i][1];
        const double x = (cols[i][0] * rhs[0] + cols[i][1] * rhs[1]) / cc;
        if (x >= 0.0) {
            std::array<double, 3> v{0.0, 0.0, 0.0};
            v[i] = x;
            consider(v);
        }
        for (int j = i + 1; j < 3; ++j) {
            if (!active[j]) continue;
            const double det = cols[i][0] * cols[j][1] - cols[j][0] * cols[i][1];
            if (std::abs(det) < 1e-14) continue;
            const double xi = (rhs[0] * cols[j][1] - cols[j][0] * rhs[1]) / det;
            const double xj = (cols[i][0] * rhs[1] - rhs[0] * cols[i][1]) / det;
            if (xi >= 0.0 && xj >= 0.0) {
                std::array<double, 3> v{0.0, 0.0, 0.0};
                v[i] = xi;
                v[j] = xj;
                consider(v);
            }
        }
    }
    return best;
}

}  // namespace detail

/// Solves the convex surrogate for fixed auxiliary variables.
inline P7Point solve_p7_inner(const Scenario& sc, std::span<const double> rho, const P4Floors& floors,
                              const AuxiliaryState& aux) {
    const std::size_t n_dev = sc.size();
    const double b_total = sc.system.total_bandwidth;
    std::vector<detail::SurrogateDevice> devs;
    devs.reserve(n_dev);
    for (std::size_t n = 0; n < n_dev; ++n) {
        if (!(aux.gamma[n] > 0.0 && aux.delta[n] > 0.0)) throw DomainError("solve_p7_inner: aux must be positive");
        devs.push_back(detail::make_surrogate(sc, n, rho[n], floors.rate[n], floors.snr[n], aux.gamma[n], aux.delta[n]));
    }

    auto replies = [&](double zeta, std::vector<double>& out) {
        double sum = 0.0;
        for (std::size_t n = 0; n < n_dev; ++n) {
            out[n] = devs[n].reply(zeta, b_total);
            sum += out[n];
        }
        return sum;
    };

    auto finish_point = [&](const std::vector<double>& bandwidth, double zeta) {
        P7Point out;
        out.bandwidth = bandwidth;
        out.zeta = zeta;
        out.power.resize(n_dev);
        out.eta.resize(n_dev);
        out.nu.resize(n_dev);
        out.iota.resize(n_dev);
        for (std::size_t n = 0; n < n_dev; ++n) {
            out.power[n] = devs[n].power(bandwidth[n]);
            const auto m = detail::recover_multipliers(devs[n], out.power[n], bandwidth[n], zeta);
            out.eta[n] = m[0];
            out.nu[n] = m[1];
            out.iota[n] = m[2];
        }
        return out;
    };

    P7Point pt;
    pt.bandwidth.resize(n_dev);
    std::vector<double> b_low(n_dev), b_high(n_dev);
    const double sum0 = replies(0.0, b_low);
    if (sum0 <= b_total) {
        pt.zeta = 0.0;
        pt.bandwidth = b_low;
    } else {
        double zeta_hi = 0.0;
        double b_lo_sum = 0.0;
        std::size_t widest = 0;
        for (std::size_t n = 0; n < n_dev; ++n) {
            zeta_hi = std::max(zeta_hi, -devs[n].value_slope(devs[n].b_lo));
            b_lo_sum += devs[n].b_lo;
            if (devs[n].b_lo > devs[widest].b_lo) widest = n;
        }
        if (b_lo_sum > b_total * (1.0 + 1e-9)) {
            throw RateFloorUnreachable(widest, "minimum bandwidths of all devices exceed B_total");
        }
        if (b_lo_sum >= b_total) {
            // Only the minimum bandwidths fit (up to rounding): scale them onto the budget.
            for (std::size_t n = 0; n < n_dev; ++n) b_low[n] = devs[n].b_lo * (b_total / b_lo_sum);
            return finish_point(b_low, zeta_hi);
        }
        double sum_hi = replies(zeta_hi, b_low);
        double zeta_lo = zeta_hi;
        double sum_lo = sum_hi;
        for (int k = 0; k < 4000; ++k) {
            zeta_lo *= 0.5;
            sum_lo = replies(zeta_lo, b_high);
            if (sum_lo > b_total) break;
            zeta_hi = zeta_lo;
            sum_hi = sum_lo;
            b_low = b_high;
        }
        if (!(sum_lo > b_total)) throw BracketingFailure("solve_p7_inner: no lower budget price", sum_lo - b_total);
        // Budget price by a bracketed solve on the decreasing total reply; the bracket spans a factor of two.
        std::vector<double> b_mid(n_dev);
        auto excess = [&](double z) {
            const double s = replies(z, b_mid);
            // Strictly negative within budget, so the bracket always keeps a feasible side.
            return s > b_total ? (s - b_total) / b_total : std::min((s - b_total) / b_total, -1e-300);
        };
        auto close_enough = [](double x, double y) { return std::abs(y - x) <= 1e-15 * std::abs(y); };
        std::uintmax_t max_iter = 300;
        const auto br = boost::math::tools::toms748_solve(excess, zeta_lo, zeta_hi, (sum_lo - b_total) / b_total,
                                                          std::min((sum_hi - b_total) / b_total, -1e-300),
                                                          close_enough, max_iter);
        zeta_lo = br.first;
        zeta_hi = br.second;
        sum_lo = replies(zeta_lo, b_high);
        sum_hi = replies(zeta_hi, b_low);
        if (!(sum_lo > b_total && sum_hi <= b_total)) {
            throw BracketingFailure("solve_p7_inner: bandwidth replies not monotone in the budget price",
                                    sum_hi - b_total);
        }
        if (!std::isfinite(sum_lo)) throw BracketingFailure("solve_p7_inner: unbounded bandwidth reply", sum_lo);
        const double theta = sum_lo > sum_hi ? (b_total - sum_hi) / (sum_lo - sum_hi) : 0.0;
        for (std::size_t n = 0; n < n_dev; ++n) pt.bandwidth[n] = b_low[n] + theta * (b_high[n] - b_low[n]);
        pt.zeta = zeta_hi + theta * (zeta_lo - zeta_hi);
    }
    return finish_point(pt.bandwidth, pt.zeta);
}

/// Direct minimisation of the total uplink energy over B with p at its floor power, by projected gradient.
/// The energy of each device is convex and non-increasing in B, so this is a smooth convex problem.
inline P4Solution solve_p4_reduced(const Scenario& sc, std::span<const double> rho, const P4Floors& floors,
                                   std::span<const double> start_bandwidth, int max_iter = 5000) {
    const std::size_t n_dev = sc.size();
    const double b_total = sc.system.total_bandwidth;
    std::vector<detail::SurrogateDevice> devs;
    for (std::size_t n = 0; n < n_dev; ++n) {
        devs.push_back(detail::make_surrogate(sc, n, rho[n], floors.rate[n], floors.snr[n], 1.0, 1.0));
    }
    auto lower = [&](std::size_t n) { return devs[n].b_lo; };
    auto upper = [&](std::size_t n) { return std::min(devs[n].b_hi, b_total); };
    auto energy = [&](std::size_t n, double b) {
        const double p = std::min(devs[n].p_floor(b), devs[n].p_max);
        return p * devs[n].a / (b * std::log1p(p * devs[n].g / (devs[n].n0 * b)) / kLn2);
    };
    auto grad = [&](std::size_t n, double b) {
        const auto& s = devs[n];
        if (s.p_rate(b) > s.p_snr(b) && s.p_rate(b) < s.p_max) return s.a * s.p_rate_slope(b) / s.r_min;
        return 0.0;
    };
    auto project = [&](std::vector<double>& b) {
        double sum = 0.0;
        for (std::size_t n = 0; n < n_dev; ++n) {
            b[n] = std::clamp(b[n], lower(n), upper(n));
            sum += b[n];
        }
        if (sum <= b_total) return;
        double lo = 0.0, hi = 0.0;
        for (std::size_t n = 0; n < n_dev; ++n) hi = std::max(hi, b[n] - lower(n));
        const std::vector<double> base = b;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            double s = 0.0;
            for (std::size_t n = 0; n < n_dev; ++n) s += std::clamp(base[n] - mid, lower(n), upper(n));
            if (s > b_total) lo = mid;
            else hi = mid;
        }
        for (std::size_t n = 0; n < n_dev; ++n) b[n] = std::clamp(base[n] - hi, lower(n), upper(n));
    };
    auto total = [&](const std::vector<double>& b) {
        double e = 0.0;
        for (std::size_t n = 0; n < n_dev; ++n) e += energy(n, b[n]);
        return e;
    };

    std::vector<double> b(start_bandwidth.begin(), start_bandwidth.end());
    project(b);
    double f = total(b);
    std::vector<double> gr(n_dev), trial(n_dev);
    double gmax = 0.0;
    for (std::size_t n = 0; n < n_dev; ++n) gmax = std::max(gmax, std::abs(grad(n, b[n])));
    double step = gmax > 0.0 ? 0.1 * b_total / static_cast<double>(n_dev) / gmax : 0.0;
    int it = 0;
    for (; it < max_iter && step > 0.0; ++it) {
        for (std::size_t n = 0; n < n_dev; ++n) gr[n] = grad(n, b[n]);
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t n = 0; n < n_dev; ++n) trial[n] = b[n] - step * gr[n];
            project(trial);
            double decrease = 0.0;
            for (std::size_t n = 0; n < n_dev; ++n) decrease += gr[n] * (trial[n] - b[n]);
            const double ft = total(trial);
            if (ft <= f + 1e-4 * decrease) {
                accepted = f - ft > 1e-15 * f;
                b = trial;
                f = ft;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }

    P4Solution sol;
    sol.bandwidth = b;
    sol.power.resize(n_dev);
    for (std::size_t n = 0; n < n_dev; ++n) sol.power[n] = std::min(devs[n].p_floor(b[n]), devs[n].p_max);
    sol.aux = init_auxiliary(sc, sol.power, sol.bandwidth, rho);
    sol.eta.assign(n_dev, 0.0);
    sol.nu.assign(n_dev, 0.0);
    sol.iota.assign(n_dev, 0.0);
    sol.iterations = it;
    sol.energy = uplink_energy_sum(sc, sol.power, sol.bandwidth, rho);
    sol.phi_norm = 0.0;
    sol.used_fallback = true;
    return sol;
}

/// Newton refinement of the auxiliary variables around the inner solve, from a feasible warm start.
inline P4Solution solve_p4(const Scenario& sc, std::span<const double> rho, std::span<const double> t_cmp,
                           std::span<const double> t_bs, double deadline, const NewtonConfig& cfg,
                           std::span<const double> warm_power, std::span<const double> warm_bandwidth) {
    cfg.validate();
    const std::size_t n_dev = sc.size();
    if (rho.size() != n_dev || t_cmp.size() != n_dev || t_bs.size() != n_dev || warm_power.size() != n_dev ||
        warm_bandwidth.size() != n_dev) {
        throw DomainError("solve_p4: dimension mismatch");
    }
    const P4Floors floors = compute_p4_floors(sc, rho, t_cmp, t_bs, deadline);

    P4Solution best;
    best.power.assign(warm_power.begin(), warm_power.end());
    best.bandwidth.assign(warm_bandwidth.begin(), warm_bandwidth.end());
    best.aux = init_auxiliary(sc, best.power, best.bandwidth, rho);
    best.eta.assign(n_dev, 0.0);
    best.nu.assign(n_dev, 0.0);
    best.iota.assign(n_dev, 0.0);
    best.energy = uplink_energy_sum(sc, best.power, best.bandwidth, rho);
    best.status = P4Status::NotConverged;

    if (sc.system.weight_energy == 0.0) {
        // Uplink energy carries no weight: any feasible point is optimal.
        best.status = P4Status::Converged;
        return best;
    }

    AuxiliaryState aux = best.aux;
    std::vector<double> trace;
    auto accept = [&](const P7Point& pt, const AuxiliaryState& a, double phi_norm, int iters, P4Status status) {
        P4Solution s;
        s.power = pt.power;
        s.bandwidth = pt.bandwidth;
        s.aux = a;
        s.zeta = pt.zeta;
        s.eta = pt.eta;
        s.nu = pt.nu;
        s.iota = pt.iota;
        s.phi_norm = phi_norm;
        s.iterations = iters;
        s.energy = uplink_energy_sum(sc, s.power, s.bandwidth, rho);
        s.status = status;
        s.phi_trace = trace;
        return s;
    };

    for (int i = 0; i < cfg.max_iter; ++i) {
        const P7Point pt = solve_p7_inner(sc, rho, floors, aux);
        const oracle::KktReport kkt = oracle::kkt_residuals_p7(sc, rho, floors, aux, pt);
        if (!(kkt.worst() <= 1e-6 && kkt.primal <= 1e-8)) {
            P4Solution fb = solve_p4_reduced(sc, rho, floors, warm_bandwidth);
            fb.phi_trace = trace;
            if (fb.energy <= best.energy) return fb;
            best.used_fallback = true;
            best.phi_trace = trace;
            return best;
        }
        const std::vector<double> phi = phi_residual(sc, pt.power, pt.bandwidth, rho, aux);
        const double norm = scaled_phi_norm(sc, pt.power, rho, phi);
        trace.push_back(norm);
        const double energy = uplink_energy_sum(sc, pt.power, pt.bandwidth, rho);
        if (norm <= cfg.phi_tol) {
            if (energy <= best.energy * (1.0 + 1e-9)) return accept(pt, aux, norm, i + 1, P4Status::Converged);
            best.iterations = i + 1;
            best.phi_trace = trace;
            return best;
        }
        if (energy < best.energy) {
            best = accept(pt, aux, norm, i + 1, P4Status::NotConverged);
        }

        std::vector<double> sigma(2 * n_dev);
        for (std::size_t n = 0; n < n_dev; ++n) {
            const double r = uplink_rate(pt.power[n], pt.bandwidth[n], sc.devices[n].gain, sc.system.noise_psd);
            sigma[n] = -phi[n] / r;
            sigma[n_dev + n] = -phi[n_dev + n] / r;
        }
        AuxiliaryState trial = aux;
        double t = 1.0;
        for (int j = 0; j < 60; ++j, t *= cfg.xi) {
            for (std::size_t n = 0; n < n_dev; ++n) {
                trial.delta[n] = aux.delta[n] + t * sigma[n];
                trial.gamma[n] = aux.gamma[n] + t * sigma[n_dev + n];
            }
            double trial_norm;
            if (cfg.line_search_mode == LineSearchMode::FixedInnerPoint) {
                trial_norm = scaled_phi_norm(sc, pt.power, rho, phi_residual(sc, pt.power, pt.bandwidth, rho, trial));
            } else {
                const P7Point tp = solve_p7_inner(sc, rho, floors, trial);
                trial_norm = scaled_phi_norm(sc, tp.power, rho, phi_residual(sc, tp.power, tp.bandwidth, rho, trial));
            }
            if (trial_norm <= (1.0 - cfg.eps * t) * norm) break;
        }
        aux = trial;
    }
    best.iterations = cfg.max_iter;
    best.phi_trace = trace;
    best.status = P4Status::NotConverged;
    return best;
}

}  // namespace semcom
