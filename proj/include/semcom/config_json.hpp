#pragma once

// JSON configuration: {"scenario": {...}, "optimizer": {...}}. Both sections and every key are
// optional; unknown keys are rejected with their full path.

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "semcom/optimizer.hpp"
#include "semcom/scenario.hpp"

namespace semcom {

struct RunConfig {
    ScenarioConfig scenario;
    OptimizerConfig optimizer;
};

namespace detail {

using Json = nlohmann::json;

template <class T>
using Setters = std::map<std::string, std::function<void(T&, const Json&)>>;

inline double json_number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

inline long long json_integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(path + ": expected an integer");
    return j.get<long long>();
}

inline std::uint64_t json_unsigned(const Json& j, const std::string& path) {
    const long long v = json_integer(j, path);
    if (v < 0) throw ConfigError(path + ": expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

template <class T>
void apply_object(T& target, const Json& obj, const Setters<T>& setters, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const auto s = setters.find(it.key());
        if (s == setters.end()) throw ConfigError("unknown key '" + path + "." + it.key() + "'");
        s->second(target, it.value());
    }
}

#define SEMCOM_NUM(T, key, field) \
    {key, [](T& t, const Json& j) { t.field = json_number(j, key); }}

inline const Setters<PsnrModel>& psnr_setters() {
    static const Setters<PsnrModel> s{
        SEMCOM_NUM(PsnrModel, "a", a),
        SEMCOM_NUM(PsnrModel, "b", b),
        SEMCOM_NUM(PsnrModel, "c_rho", c_rho),
        SEMCOM_NUM(PsnrModel, "c_s", c_s),
    };
    return s;
}

inline const Setters<ScenarioConfig>& scenario_setters() {
    static const Setters<ScenarioConfig> s{
        {"device_count", [](ScenarioConfig& c, const Json& j) {
             const auto v = json_unsigned(j, "device_count");
             if (v < 1) throw ConfigError("device_count must be >= 1");
             c.device_count = static_cast<std::size_t>(v);
         }},
        SEMCOM_NUM(ScenarioConfig, "cell_radius_m", cell_radius_m),
        SEMCOM_NUM(ScenarioConfig, "min_distance_m", min_distance_m),
        SEMCOM_NUM(ScenarioConfig, "path_loss_a_db", path_loss_a_db),
        SEMCOM_NUM(ScenarioConfig, "path_loss_b_db", path_loss_b_db),
        SEMCOM_NUM(ScenarioConfig, "shadow_sigma_db", shadow_sigma_db),
        SEMCOM_NUM(ScenarioConfig, "total_bandwidth_hz", total_bandwidth_hz),
        SEMCOM_NUM(ScenarioConfig, "noise_psd_dbm_per_hz", noise_psd_dbm_per_hz),
        SEMCOM_NUM(ScenarioConfig, "kappa", kappa),
        SEMCOM_NUM(ScenarioConfig, "weight_time", weight_time),
        SEMCOM_NUM(ScenarioConfig, "weight_energy", weight_energy),
        SEMCOM_NUM(ScenarioConfig, "samples", samples),
        SEMCOM_NUM(ScenarioConfig, "sample_bits", sample_bits),
        SEMCOM_NUM(ScenarioConfig, "cycles_device_min", cycles_device_min),
        SEMCOM_NUM(ScenarioConfig, "cycles_device_max", cycles_device_max),
        SEMCOM_NUM(ScenarioConfig, "cycles_bs_min", cycles_bs_min),
        SEMCOM_NUM(ScenarioConfig, "cycles_bs_max", cycles_bs_max),
        SEMCOM_NUM(ScenarioConfig, "p_max_dbm", p_max_dbm),
        SEMCOM_NUM(ScenarioConfig, "f_max_hz", f_max_hz),
        SEMCOM_NUM(ScenarioConfig, "h_max_hz", h_max_hz),
        SEMCOM_NUM(ScenarioConfig, "rho_min", rho_min),
        SEMCOM_NUM(ScenarioConfig, "rho_max", rho_max),
        SEMCOM_NUM(ScenarioConfig, "psnr_min_db", psnr_min_db),
        {"psnr_model", [](ScenarioConfig& c, const Json& j) {
             apply_object(c.psnr_model, j, psnr_setters(), "scenario.psnr_model");
         }},
        {"seed", [](ScenarioConfig& c, const Json& j) { c.seed = json_unsigned(j, "seed"); }},
    };
    return s;
}

inline const Setters<NewtonConfig>& newton_setters() {
    static const Setters<NewtonConfig> s{
        SEMCOM_NUM(NewtonConfig, "xi", xi),
        SEMCOM_NUM(NewtonConfig, "eps", eps),
        SEMCOM_NUM(NewtonConfig, "phi_tol", phi_tol),
        {"max_iter", [](NewtonConfig& c, const Json& j) { c.max_iter = static_cast<int>(json_integer(j, "max_iter")); }},
        {"line_search_mode", [](NewtonConfig& c, const Json& j) {
             if (!j.is_string()) throw ConfigError("line_search_mode: expected a string");
             c.line_search_mode = line_search_mode_from_string(j.get<std::string>());
         }},
    };
    return s;
}

inline const Setters<P3Options>& p3_setters() {
    static const Setters<P3Options> s{
        SEMCOM_NUM(P3Options, "rel_tol", rel_tol),
        {"max_iter", [](P3Options& c, const Json& j) { c.max_iter = static_cast<int>(json_integer(j, "max_iter")); }},
    };
    return s;
}

inline const Setters<OptimizerConfig>& optimizer_setters() {
    static const Setters<OptimizerConfig> s{
        {"max_outer", [](OptimizerConfig& c, const Json& j) {
             c.max_outer = static_cast<int>(json_integer(j, "max_outer"));
         }},
        SEMCOM_NUM(OptimizerConfig, "eps_outer", eps_outer),
        {"newton", [](OptimizerConfig& c, const Json& j) {
             apply_object(c.newton, j, newton_setters(), "optimizer.newton");
         }},
        {"p3", [](OptimizerConfig& c, const Json& j) { apply_object(c.p3, j, p3_setters(), "optimizer.p3"); }},
        {"initial_point_policy", [](OptimizerConfig& c, const Json& j) {
             if (!j.is_string()) throw ConfigError("initial_point_policy: expected a string");
             c.initial_point_policy = initial_point_policy_from_string(j.get<std::string>());
         }},
        {"rebalance_uplink", [](OptimizerConfig& c, const Json& j) {
             if (!j.is_boolean()) throw ConfigError("rebalance_uplink: expected a boolean");
             c.rebalance_uplink = j.get<bool>();
         }},
    };
    return s;
}

#undef SEMCOM_NUM

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
    detail::Json j;
    try {
        j = detail::Json::parse(text);
    } catch (const detail::Json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    RunConfig rc;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "scenario") {
            detail::apply_object(rc.scenario, it.value(), detail::scenario_setters(), "scenario");
        } else if (it.key() == "optimizer") {
            detail::apply_object(rc.optimizer, it.value(), detail::optimizer_setters(), "optimizer");
        } else if (it.key() != "$schema") {
            throw ConfigError("unknown key '" + it.key() + "'");
        }
    }
    rc.scenario.validate();
    rc.optimizer.validate();
    return rc;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return parse_run_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline nlohmann::json to_json(const Allocation& a, const ConsumptionReport& r) {
    nlohmann::json j;
    j["power_w"] = a.power;
    j["bandwidth_hz"] = a.bandwidth;
    j["freq_device_hz"] = a.freq_device;
    j["freq_bs_hz"] = a.freq_bs;
    j["rho"] = a.rho;
    j["deadline_s"] = r.t_max;
    j["energy_j"] = r.e_total;
    j["objective"] = r.objective;
    j["bottleneck"] = r.bottleneck;
    return j;
}

}  // namespace semcom
