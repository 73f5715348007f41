#pragma once

// Domain types and closed-form time/energy/rate formulas shared by every solver.
// All quantities are linear SI: W, Hz, s, J, bits. dB and dBm only appear at
// configuration boundaries (see scenario.hpp).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "semcom/errors.hpp"

namespace semcom {

inline constexpr double kLn2 = std::numbers::ln2;

struct SystemParams {
    double total_bandwidth = 20e6;   // Hz
    double noise_psd = 3.981071705534972e-21;  // W/Hz
    double kappa = 1e-28;            // effective switched capacitance
    double weight_time = 0.5;
    double weight_energy = 0.5;
    std::size_t device_count = 50;

    /// Builds validated parameters; the two weights are normalised to sum to one.
    static SystemParams make(double total_bandwidth, double noise_psd, double kappa,
                             double weight_time, double weight_energy, std::size_t device_count) {
        SystemParams s;
        s.total_bandwidth = total_bandwidth;
        s.noise_psd = noise_psd;
        s.kappa = kappa;
        if (!(weight_time >= 0.0) || !(weight_energy >= 0.0) || weight_time + weight_energy <= 0.0) {
            throw DomainError("weights must be non-negative and not both zero");
        }
        const double sum = weight_time + weight_energy;
        s.weight_time = weight_time / sum;
        s.weight_energy = weight_energy / sum;
        s.device_count = device_count;
        s.validate();
        return s;
    }

    void validate() const {
        if (!(total_bandwidth > 0.0)) throw DomainError("total_bandwidth must be > 0");
        if (!(noise_psd > 0.0)) throw DomainError("noise_psd must be > 0");
        if (!(kappa > 0.0)) throw DomainError("kappa must be > 0");
        if (device_count < 1) throw DomainError("device_count must be >= 1");
        if (!(weight_time >= 0.0 && weight_energy >= 0.0) ||
            std::abs(weight_time + weight_energy - 1.0) > 1e-12) {
            throw DomainError("weights must be non-negative and sum to one");
        }
    }
};

struct DeviceProfile {
    double gain = 1e-11;          // linear power gain
    double cycles_device = 2e6;   // CPU cycles per sample on the device
    double cycles_bs = 4e6;       // CPU cycles per sample at the base station
    double samples = 32;          // D_n
    double sample_bits = 1e6;     // d_n
    double p_max = 0.1;           // W
    double f_max = 1e9;           // Hz
    double h_max = 5e9;           // Hz
    double rho_min = 0.1;
    double rho_max = 0.3;
    double psnr_min = 25.0;       // dB

    void validate() const {
        const bool positive = gain > 0 && cycles_device > 0 && cycles_bs > 0 && samples > 0 &&
                              sample_bits > 0 && p_max > 0 && f_max > 0 && h_max > 0 &&
                              rho_min > 0 && rho_max > 0 && psnr_min > 0;
        if (!positive) throw DomainError("device profile fields must be > 0");
        if (gain > 1.0) throw DomainError("channel gain must be <= 1");
        if (rho_min > rho_max || rho_max > 1.0) throw DomainError("need 0 < rho_min <= rho_max <= 1");
    }

    /// Bits uploaded per round at compression rate rho.
    double payload_bits(double rho) const noexcept { return rho * sample_bits * samples; }
};

/// Concave PSNR surface P(rho, S) = a * ln(c_rho * rho + c_s * S + b).
struct PsnrModel {
    double a = 18.67;
    double b = 5.11;
    double c_rho = 3.35 * 1.52;
    double c_s = 3.35 * 0.03;

    /// Coefficients of the published CIFAR-10 fit, expanded from the (l, x) form.
    static PsnrModel fitted() noexcept { return PsnrModel{}; }

    void validate() const {
        if (!(a > 0.0 && b > 1.0 && c_rho > 0.0 && c_s > 0.0)) {
            throw DomainError("psnr model requires a > 0, b > 1, c_rho > 0, c_s > 0");
        }
    }

    double operator()(double rho, double s) const {
        if (!(rho >= 0.0) || !(s >= 0.0)) throw DomainError("psnr: rho and snr must be >= 0");
        const double arg = c_rho * rho + c_s * s + b;
        if (!(arg > 0.0)) throw DomainError("psnr: logarithm argument must be > 0");
        return a * std::log(arg);
    }

    /// Compression rate at which the PSNR equals the target for a given SNR. May be negative.
    double inverse_rho(double psnr_target, double s) const {
        if (!(s >= 0.0)) throw DomainError("inverse_rho: snr must be >= 0");
        return (std::exp(psnr_target / a) - b - c_s * s) / c_rho;
    }

    /// Minimum SNR meeting the target at compression rate rho, clamped at zero.
    double inverse_snr(double psnr_target, double rho) const {
        if (!(rho >= 0.0)) throw DomainError("inverse_snr: rho must be >= 0");
        return std::max(0.0, (std::exp(psnr_target / a) - b - c_rho * rho) / c_s);
    }
};

/// One problem instance: system constants, per-device profiles and the PSNR surface.
struct Scenario {
    SystemParams system;
    std::vector<DeviceProfile> devices;
    PsnrModel psnr_model;
    std::vector<double> pos_x;  // m, retained for traceability
    std::vector<double> pos_y;

    std::size_t size() const noexcept { return devices.size(); }

    void validate() const {
        system.validate();
        psnr_model.validate();
        if (devices.size() != system.device_count) {
            throw DomainError("scenario: device list length differs from device_count");
        }
        for (const auto& d : devices) d.validate();
    }
};

struct Allocation {
    std::vector<double> power;        // W
    std::vector<double> bandwidth;    // Hz
    std::vector<double> freq_device;  // Hz
    std::vector<double> freq_bs;      // Hz
    std::vector<double> rho;
    std::optional<double> deadline;   // s

    std::size_t size() const noexcept { return power.size(); }

    static Allocation sized(std::size_t n) {
        Allocation a;
        a.power.assign(n, 0.0);
        a.bandwidth.assign(n, 0.0);
        a.freq_device.assign(n, 0.0);
        a.freq_bs.assign(n, 0.0);
        a.rho.assign(n, 0.0);
        return a;
    }

    void check_dimensions(std::size_t n) const {
        if (power.size() != n || bandwidth.size() != n || freq_device.size() != n ||
            freq_bs.size() != n || rho.size() != n) {
            throw DomainError("allocation vectors must all have length N");
        }
    }

    bool operator==(const Allocation&) const = default;
};

struct ConsumptionReport {
    std::vector<double> t_cmp, t_up, t_bs;
    std::vector<double> e_cmp, e_up, e_bs;
    double t_max = 0.0;
    double e_total = 0.0;
    double objective = 0.0;
    std::size_t bottleneck = 0;  // device attaining t_max

    double device_time(std::size_t n) const { return t_cmp[n] + t_up[n] + t_bs[n]; }
    double device_energy(std::size_t n) const { return e_cmp[n] + e_up[n] + e_bs[n]; }
};

// Shannon rate B * log2(1 + p g / (N0 B)).
inline double uplink_rate(double power, double bandwidth, double gain, double noise_psd) {
    if (!(power > 0.0 && bandwidth > 0.0 && gain > 0.0 && noise_psd > 0.0)) {
        throw DomainError("uplink_rate: all arguments must be > 0");
    }
    return bandwidth * std::log1p(power * gain / (noise_psd * bandwidth)) / kLn2;
}

inline double snr(double power, double bandwidth, double gain, double noise_psd) {
    if (!(power > 0.0 && bandwidth > 0.0 && gain > 0.0 && noise_psd > 0.0)) {
        throw DomainError("snr: all arguments must be > 0");
    }
    return power * gain / (noise_psd * bandwidth);
}

/// Partial derivative of the rate with respect to bandwidth, as a function of the SNR.
inline double rate_bandwidth_slope(double s) noexcept {
    return (std::log1p(s) - s / (1.0 + s)) / kLn2;
}

inline double compute_time(double cycles, double samples, double freq) { return cycles * samples / freq; }

inline double compute_energy(double kappa, double cycles, double samples, double freq) {
    return kappa * cycles * samples * freq * freq;
}

inline double weighted_objective(const SystemParams& sys, double t_max, double e_total) noexcept {
    return sys.weight_time * t_max + sys.weight_energy * e_total;
}

/// Per-device and aggregate time/energy of an allocation.
inline ConsumptionReport consumption(const Scenario& sc, const Allocation& alloc) {
    const std::size_t n_dev = sc.size();
    alloc.check_dimensions(n_dev);
    ConsumptionReport rep;
    rep.t_cmp.resize(n_dev);
    rep.t_up.resize(n_dev);
    rep.t_bs.resize(n_dev);
    rep.e_cmp.resize(n_dev);
    rep.e_up.resize(n_dev);
    rep.e_bs.resize(n_dev);
    const double kappa = sc.system.kappa;
    for (std::size_t n = 0; n < n_dev; ++n) {
        const auto& d = sc.devices[n];
        if (!(alloc.freq_device[n] > 0.0 && alloc.freq_bs[n] > 0.0)) {
            throw DomainError("consumption: frequencies must be > 0");
        }
        const double r = (alloc.power[n] > 0.0 && alloc.bandwidth[n] > 0.0)
                             ? uplink_rate(alloc.power[n], alloc.bandwidth[n], d.gain, sc.system.noise_psd)
                             : 0.0;
        if (!(r > 0.0)) {
            throw InfeasibleTransmission("consumption: device " + std::to_string(n) + " has zero rate");
        }
        rep.t_cmp[n] = compute_time(d.cycles_device, d.samples, alloc.freq_device[n]);
        rep.t_up[n] = d.payload_bits(alloc.rho[n]) / r;
        rep.t_bs[n] = compute_time(d.cycles_bs, d.samples, alloc.freq_bs[n]);
        rep.e_cmp[n] = compute_energy(kappa, d.cycles_device, d.samples, alloc.freq_device[n]);
        rep.e_up[n] = alloc.power[n] * rep.t_up[n];
        rep.e_bs[n] = compute_energy(kappa, d.cycles_bs, d.samples, alloc.freq_bs[n]);
    }
    for (std::size_t n = 0; n < n_dev; ++n) {
        const double t = rep.device_time(n);
        if (t > rep.t_max) {
            rep.t_max = t;
            rep.bottleneck = n;
        }
        rep.e_total += rep.device_energy(n);
    }
    rep.objective = weighted_objective(sc.system, rep.t_max, rep.e_total);
    return rep;
}

/// Per-device PSNR achieved by an allocation.
inline std::vector<double> achieved_psnr(const Scenario& sc, const Allocation& alloc) {
    std::vector<double> out(sc.size());
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& d = sc.devices[n];
        out[n] = sc.psnr_model(alloc.rho[n], snr(alloc.power[n], alloc.bandwidth[n], d.gain, sc.system.noise_psd));
    }
    return out;
}

}  // namespace semcom

namespace semcom {

/// Constraint violations of an allocation against P1 (bounds, band budget, PSNR floor).
struct FeasibilityReport {
    std::vector<std::string> violations;
    bool ok() const noexcept { return violations.empty(); }
};

inline FeasibilityReport check_feasibility(const Scenario& sc, const Allocation& alloc, double rel_tol = 1e-9) {
    FeasibilityReport rep;
    const std::size_t n_dev = sc.size();
    alloc.check_dimensions(n_dev);
    auto fail = [&](std::size_t n, const std::string& what) {
        rep.violations.push_back("device " + std::to_string(n) + ": " + what);
    };
    double b_sum = 0.0;
    for (std::size_t n = 0; n < n_dev; ++n) {
        const auto& d = sc.devices[n];
        const double p = alloc.power[n], b = alloc.bandwidth[n];
        if (!(p > 0.0) || p > d.p_max * (1.0 + rel_tol)) fail(n, "power out of (0, p_max]");
        if (!(b > 0.0)) fail(n, "bandwidth must be > 0");
        if (!(alloc.freq_device[n] > 0.0) || alloc.freq_device[n] > d.f_max * (1.0 + rel_tol)) {
            fail(n, "device frequency out of (0, f_max]");
        }
        if (!(alloc.freq_bs[n] > 0.0) || alloc.freq_bs[n] > d.h_max * (1.0 + rel_tol)) {
            fail(n, "BS frequency out of (0, h_max]");
        }
        if (alloc.rho[n] < d.rho_min * (1.0 - rel_tol) || alloc.rho[n] > d.rho_max * (1.0 + rel_tol)) {
            fail(n, "rho out of [rho_min, rho_max]");
        }
        if (p > 0.0 && b > 0.0 && alloc.rho[n] >= 0.0) {
            const double q = sc.psnr_model(alloc.rho[n], snr(p, b, d.gain, sc.system.noise_psd));
            if (q < d.psnr_min * (1.0 - rel_tol)) fail(n, "PSNR below floor");
        }
        b_sum += b;
    }
    if (b_sum > sc.system.total_bandwidth * (1.0 + rel_tol)) {
        rep.violations.push_back("sum of bandwidth exceeds total_bandwidth");
    }
    return rep;
}

}  // namespace semcom
