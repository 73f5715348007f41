#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

#include "semcom/core_model.hpp"
#include "semcom/rng.hpp"

namespace semcom {

inline double dbm_to_watt(double dbm) noexcept { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }
inline double watt_to_dbm(double w) noexcept { return 10.0 * std::log10(w) + 30.0; }

/// Generator settings. Defaults reproduce the reference system of the experiments
/// (N = 50, 20 MHz, 500 m cell diameter, 3GPP urban path loss).
struct ScenarioConfig {
    std::size_t device_count = 50;
    double cell_radius_m = 250.0;
    double min_distance_m = 10.0;
    double path_loss_a_db = 128.1;
    double path_loss_b_db = 37.6;  // per decade of km
    double shadow_sigma_db = 8.0;
    double total_bandwidth_hz = 20e6;
    double noise_psd_dbm_per_hz = -174.0;
    double kappa = 1e-28;
    double weight_time = 0.5;
    double weight_energy = 0.5;
    double samples = 32;
    double sample_bits = 1e6;
    double cycles_device_min = 1e6;
    double cycles_device_max = 3e6;
    double cycles_bs_min = 3e6;
    double cycles_bs_max = 5e6;
    double p_max_dbm = 20.0;
    double f_max_hz = 1e9;
    double h_max_hz = 5e9;
    double rho_min = 0.1;
    double rho_max = 0.3;
    double psnr_min_db = 25.0;
    PsnrModel psnr_model = PsnrModel::fitted();
    std::uint64_t seed = 0;

    void validate() const {
        if (device_count < 1) throw ConfigError("device_count must be >= 1");
        if (!(cell_radius_m > min_distance_m && min_distance_m > 0.0)) {
            throw ConfigError("need cell_radius_m > min_distance_m > 0");
        }
        if (!(shadow_sigma_db >= 0.0)) throw ConfigError("shadow_sigma_db must be >= 0");
        if (!(cycles_device_min > 0.0 && cycles_device_min <= cycles_device_max)) {
            throw ConfigError("cycles_device range must be positive and non-empty");
        }
        if (!(cycles_bs_min > 0.0 && cycles_bs_min <= cycles_bs_max)) {
            throw ConfigError("cycles_bs range must be positive and non-empty");
        }
        if (!(rho_min > 0.0 && rho_min <= rho_max && rho_max <= 1.0)) {
            throw ConfigError("need 0 < rho_min <= rho_max <= 1");
        }
        if (!(total_bandwidth_hz > 0.0 && kappa > 0.0 && samples > 0.0 && sample_bits > 0.0 &&
              f_max_hz > 0.0 && h_max_hz > 0.0 && psnr_min_db > 0.0)) {
            throw ConfigError("scenario constants must be > 0");
        }
        if (!(weight_time >= 0.0 && weight_energy >= 0.0 && weight_time + weight_energy > 0.0)) {
            throw ConfigError("weights must be non-negative and not both zero");
        }
        psnr_model.validate();
    }
};

/// Path loss in dB at distance d (metres); the log term is taken over kilometres.
inline double path_loss_db(double a_db, double b_db, double distance_m) {
    return a_db + b_db * std::log10(distance_m / 1000.0);
}

inline double gain_from_loss_db(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

/// Uniform point in the annulus [min_distance, radius] around the base station.
/// Radius by inverse CDF r = R sqrt(u), rejected below min_distance.
inline std::pair<double, double> sample_position(CounterRng& rng, double radius, double min_distance) {
    double r = 0.0;
    do {
        r = radius * std::sqrt(rng.uniform());
    } while (r < min_distance);
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    return {r * std::cos(theta), r * std::sin(theta)};
}

/// Draws a reproducible scenario. Device n uses stream (seed, n), so the first k devices of an
/// N-device scenario coincide with a k-device scenario of the same seed.
inline Scenario sample_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    Scenario sc;
    sc.system = SystemParams::make(cfg.total_bandwidth_hz, dbm_to_watt(cfg.noise_psd_dbm_per_hz), cfg.kappa,
                                   cfg.weight_time, cfg.weight_energy, cfg.device_count);
    sc.psnr_model = cfg.psnr_model;
    sc.devices.reserve(cfg.device_count);
    const double p_max = dbm_to_watt(cfg.p_max_dbm);
    for (std::size_t n = 0; n < cfg.device_count; ++n) {
        CounterRng rng(cfg.seed, streams::kScenarioDevice + n);
        const auto [x, y] = sample_position(rng, cfg.cell_radius_m, cfg.min_distance_m);
        const double dist = std::hypot(x, y);
        const double loss = path_loss_db(cfg.path_loss_a_db, cfg.path_loss_b_db, dist);
        double gain = 0.0;
        do {
            gain = gain_from_loss_db(loss + rng.normal(0.0, cfg.shadow_sigma_db));
        } while (gain > 1.0);

        DeviceProfile d;
        d.gain = gain;
        d.cycles_device = rng.uniform(cfg.cycles_device_min, cfg.cycles_device_max);
        d.cycles_bs = rng.uniform(cfg.cycles_bs_min, cfg.cycles_bs_max);
        d.samples = cfg.samples;
        d.sample_bits = cfg.sample_bits;
        d.p_max = p_max;
        d.f_max = cfg.f_max_hz;
        d.h_max = cfg.h_max_hz;
        d.rho_min = cfg.rho_min;
        d.rho_max = cfg.rho_max;
        d.psnr_min = cfg.psnr_min_db;
        sc.devices.push_back(d);
        sc.pos_x.push_back(x);
        sc.pos_y.push_back(y);
    }
    sc.validate();
    return sc;
}

}  // namespace semcom
