#pragma once

// Parameter sweeps over seeded scenarios, CSV tables and SVG line charts.
//
// Output is byte-deterministic: tasks are (value, seed) pairs executed by a worker pool, but rows
// are stored by task index and emitted in (value, seed, method) order. Wall-clock timings are kept
// in memory only.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "semcom/baselines.hpp"
#include "semcom/optimizer.hpp"
#include "semcom/scenario.hpp"

namespace semcom {

enum class SweepParam { TotalBandwidth, PMax, FMax, WeightTime, DeviceCount, PsnrMin };

inline constexpr SweepParam kAllSweepParams[] = {SweepParam::TotalBandwidth, SweepParam::PMax,
                                                 SweepParam::FMax,           SweepParam::WeightTime,
                                                 SweepParam::DeviceCount,    SweepParam::PsnrMin};

inline std::string_view to_string(SweepParam p) {
    switch (p) {
        case SweepParam::TotalBandwidth: return "total_bandwidth";
        case SweepParam::PMax: return "p_max";
        case SweepParam::FMax: return "f_max";
        case SweepParam::WeightTime: return "weight_time";
        case SweepParam::DeviceCount: return "device_count";
        case SweepParam::PsnrMin: return "psnr_min";
    }
    return "unknown";
}

inline SweepParam sweep_param_from_string(std::string_view s) {
    for (SweepParam p : kAllSweepParams) {
        if (to_string(p) == s) return p;
    }
    throw ConfigError("unknown sweep parameter '" + std::string(s) + "'");
}

/// Units: total_bandwidth in Hz, p_max in dBm, f_max in Hz, weight_time in [0, 1] (the energy
/// weight becomes 1 - value), device_count as an integer, psnr_min in dB.
inline ScenarioConfig apply_param(ScenarioConfig cfg, SweepParam p, double value) {
    switch (p) {
        case SweepParam::TotalBandwidth: cfg.total_bandwidth_hz = value; break;
        case SweepParam::PMax: cfg.p_max_dbm = value; break;
        case SweepParam::FMax: cfg.f_max_hz = value; break;
        case SweepParam::WeightTime:
            cfg.weight_time = value;
            cfg.weight_energy = 1.0 - value;
            break;
        case SweepParam::DeviceCount: {
            const double r = std::round(value);
            if (r < 1.0 || std::abs(r - value) > 1e-9) throw ConfigError("device_count values must be positive integers");
            cfg.device_count = static_cast<std::size_t>(r);
            break;
        }
        case SweepParam::PsnrMin: cfg.psnr_min_db = value; break;
    }
    return cfg;
}

inline constexpr std::string_view kProposed = "proposed";

inline void validate_method(std::string_view m) {
    if (m != kProposed) baseline_from_string(m);
}

struct SweepSpec {
    SweepParam parameter = SweepParam::TotalBandwidth;
    std::vector<double> values;
    std::uint64_t seeds = 100;
    std::uint64_t first_seed = 0;
    std::vector<std::string> methods{std::string(kProposed)};
    unsigned threads = 0;  // 0: SEMCOM_ALLOC_THREADS or the hardware concurrency

    void validate() const {
        if (values.empty()) throw ConfigError("sweep: values must not be empty");
        const bool inc = std::is_sorted(values.begin(), values.end(), std::less_equal<>{}) &&
                         std::adjacent_find(values.begin(), values.end()) == values.end();
        const bool dec = std::is_sorted(values.begin(), values.end(), std::greater_equal<>{}) &&
                         std::adjacent_find(values.begin(), values.end()) == values.end();
        if (!(inc || dec)) throw ConfigError("sweep: values must be strictly monotone");
        if (seeds < 1) throw ConfigError("sweep: seeds must be >= 1");
        if (methods.empty()) throw ConfigError("sweep: methods must not be empty");
        for (const auto& m : methods) validate_method(m);
    }
};

struct SweepRow {
    std::string param;
    double value = 0.0;
    std::uint64_t seed = 0;
    std::string method;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double t_total = std::numeric_limits<double>::quiet_NaN();
    double e_total = std::numeric_limits<double>::quiet_NaN();
    double e_device = std::numeric_limits<double>::quiet_NaN();  // sum over devices of compute + uplink energy
    double e_bs = std::numeric_limits<double>::quiet_NaN();      // sum of BS-side compute energy
    double t_device = std::numeric_limits<double>::quiet_NaN();  // compute + uplink time of the bottleneck device
    double t_bs = std::numeric_limits<double>::quiet_NaN();      // BS time of the bottleneck device
    int iters = 0;
    std::string converged;  // "true", "false" or "error:<tag>"
    // In memory only.
    double psnr_mean = std::numeric_limits<double>::quiet_NaN();
    double psnr_min = std::numeric_limits<double>::quiet_NaN();
    double psnr_max = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;

    bool ok() const noexcept { return converged.rfind("error", 0) != 0; }
};

struct SweepResult {
    SweepParam parameter = SweepParam::TotalBandwidth;
    std::vector<double> values;
    std::vector<std::string> methods;
    std::vector<SweepRow> rows;
};

inline std::string error_tag(const std::exception& e) {
    if (dynamic_cast<const InfeasibleRho*>(&e)) return "error:infeasible_rho";
    if (dynamic_cast<const RateFloorUnreachable*>(&e)) return "error:rate_floor_unreachable";
    if (dynamic_cast<const ScenarioInfeasible*>(&e)) return "error:scenario_infeasible";
    if (dynamic_cast<const DeadlineInfeasible*>(&e)) return "error:deadline_infeasible";
    if (dynamic_cast<const DeadlineExhausted*>(&e)) return "error:deadline_exhausted";
    if (dynamic_cast<const DegenerateWeights*>(&e)) return "error:degenerate_weights";
    if (dynamic_cast<const BracketingFailure*>(&e)) return "error:bracketing_failure";
    if (dynamic_cast<const SolveFailure*>(&e)) {
        const std::string what = e.what();
        if (what.find("rate floor") != std::string::npos) return "error:solve_rate_floor";
        return "error:solve_failure";
    }
    if (dynamic_cast<const ConfigError*>(&e)) return "error:config";
    if (dynamic_cast<const Error*>(&e)) return "error:model";
    return "error:internal";
}

inline void fill_metrics(SweepRow& row, const Scenario& sc, const Allocation& a) {
    const ConsumptionReport rep = consumption(sc, a);
    row.objective = rep.objective;
    row.t_total = rep.t_max;
    row.e_total = rep.e_total;
    double e_dev = 0.0, e_bs = 0.0;
    for (std::size_t n = 0; n < sc.size(); ++n) {
        e_dev += rep.e_cmp[n] + rep.e_up[n];
        e_bs += rep.e_bs[n];
    }
    row.e_device = e_dev;
    row.e_bs = e_bs;
    row.t_device = rep.t_cmp[rep.bottleneck] + rep.t_up[rep.bottleneck];
    row.t_bs = rep.t_bs[rep.bottleneck];
    const std::vector<double> q = achieved_psnr(sc, a);
    double sum = 0.0;
    row.psnr_min = std::numeric_limits<double>::infinity();
    row.psnr_max = -std::numeric_limits<double>::infinity();
    for (double v : q) {
        sum += v;
        row.psnr_min = std::min(row.psnr_min, v);
        row.psnr_max = std::max(row.psnr_max, v);
    }
    row.psnr_mean = sum / static_cast<double>(q.size());
}

/// Runs one method on one scenario; failures become rows with an error tag.
inline SweepRow run_method(const std::string& method, const Scenario& sc, std::uint64_t seed,
                           const OptimizerConfig& opt) {
    SweepRow row;
    row.seed = seed;
    row.method = method;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (method == kProposed) {
            const SolveResult r = solve(sc, opt);
            fill_metrics(row, sc, r.allocation);
            row.iters = r.trace.outer_iterations;
            row.converged = r.trace.converged ? "true" : "false";
        } else {
            const Allocation a = run_baseline(baseline_from_string(method), sc, seed, opt);
            fill_metrics(row, sc, a);
            row.iters = 0;
            row.converged = "true";
        }
    } catch (const std::exception& e) {
        row = SweepRow{};
        row.seed = seed;
        row.method = method;
        row.converged = error_tag(e);
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

inline unsigned worker_count(unsigned requested, std::size_t tasks) {
    unsigned n = requested;
    if (n == 0) {
        n = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("SEMCOM_ALLOC_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
        }
    }
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, tasks)));
}

inline SweepResult run_sweep(const SweepSpec& spec, const ScenarioConfig& base, const OptimizerConfig& opt) {
    spec.validate();
    opt.validate();
    for (double v : spec.values) apply_param(base, spec.parameter, v).validate();

    SweepResult res;
    res.parameter = spec.parameter;
    res.values = spec.values;
    res.methods = spec.methods;
    const std::size_t n_seeds = spec.seeds;
    const std::size_t n_tasks = spec.values.size() * n_seeds;
    std::vector<std::vector<SweepRow>> slots(n_tasks);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= n_tasks) return;
            const double value = spec.values[t / n_seeds];
            const std::uint64_t seed = spec.first_seed + t % n_seeds;
            ScenarioConfig cfg = apply_param(base, spec.parameter, value);
            cfg.seed = seed;
            std::vector<SweepRow> rows;
            try {
                const Scenario sc = sample_scenario(cfg);
                for (const auto& m : spec.methods) rows.push_back(run_method(m, sc, seed, opt));
            } catch (const std::exception& e) {
                for (const auto& m : spec.methods) {
                    SweepRow r;
                    r.seed = seed;
                    r.method = m;
                    r.converged = error_tag(e);
                    rows.push_back(r);
                }
            }
            for (auto& r : rows) {
                r.param = std::string(to_string(spec.parameter));
                r.value = value;
            }
            slots[t] = std::move(rows);
        }
    };
    const unsigned n_workers = worker_count(spec.threads, n_tasks);
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& s : slots) {
        for (auto& r : s) res.rows.push_back(std::move(r));
    }
    return res;
}

// ---- CSV ----

inline constexpr std::string_view kCsvHeader =
    "param,value,seed,method,objective,t_total,e_total,e_device,e_bs,t_device,t_bs,iters,converged";

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string to_csv(const SweepResult& r) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& row : r.rows) {
        out += row.param + ',' + format_number(row.value) + ',' + std::to_string(row.seed) + ',' + row.method + ',' +
               format_number(row.objective) + ',' + format_number(row.t_total) + ',' + format_number(row.e_total) +
               ',' + format_number(row.e_device) + ',' + format_number(row.e_bs) + ',' +
               format_number(row.t_device) + ',' + format_number(row.t_bs) + ',' + std::to_string(row.iters) + ',' +
               row.converged + '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << text;
    f.close();
    if (!f) throw Error("write to '" + path + "' failed");
}

inline void write_csv(const SweepResult& r, const std::string& path) { write_text_file(path, to_csv(r)); }

inline double parse_number(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw Error("csv: bad number '" + s + "'");
    return v;
}

/// Parses text produced by to_csv. The parameter, values and methods are reconstructed from the rows.
inline SweepResult parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw Error("csv: missing or unexpected header");
    SweepResult r;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 13) throw Error("csv: expected 13 fields, got " + std::to_string(f.size()));
        SweepRow row;
        row.param = f[0];
        row.value = parse_number(f[1]);
        row.seed = std::stoull(f[2]);
        row.method = f[3];
        row.objective = parse_number(f[4]);
        row.t_total = parse_number(f[5]);
        row.e_total = parse_number(f[6]);
        row.e_device = parse_number(f[7]);
        row.e_bs = parse_number(f[8]);
        row.t_device = parse_number(f[9]);
        row.t_bs = parse_number(f[10]);
        row.iters = std::stoi(f[11]);
        row.converged = f[12];
        if (first) {
            r.parameter = sweep_param_from_string(row.param);
            first = false;
        }
        if (std::find(r.values.begin(), r.values.end(), row.value) == r.values.end()) r.values.push_back(row.value);
        if (std::find(r.methods.begin(), r.methods.end(), row.method) == r.methods.end()) r.methods.push_back(row.method);
        r.rows.push_back(std::move(row));
    }
    return r;
}

inline SweepResult read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for reading");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str());
}

// ---- aggregation ----

inline constexpr std::string_view kMetrics[] = {"objective", "t_total", "e_total", "e_device", "e_bs",
                                                "t_device",  "t_bs",    "iters",   "psnr_mean"};

inline double metric_of(const SweepRow& r, std::string_view m) {
    if (m == "objective") return r.objective;
    if (m == "t_total") return r.t_total;
    if (m == "e_total") return r.e_total;
    if (m == "e_device") return r.e_device;
    if (m == "e_bs") return r.e_bs;
    if (m == "t_device") return r.t_device;
    if (m == "t_bs") return r.t_bs;
    if (m == "iters") return r.iters;
    if (m == "psnr_mean") return r.psnr_mean;
    throw ConfigError("unknown metric '" + std::string(m) + "'");
}

struct AggregatePoint {
    double value = 0.0;
    std::string method;
    std::size_t count = 0;   // successful rows
    std::size_t errors = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double min = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
};

/// Seed statistics of one metric per (value, method), in the result's value and method order.
inline std::vector<AggregatePoint> aggregate(const SweepResult& r, std::string_view metric) {
    metric_of(SweepRow{}, metric);
    std::vector<AggregatePoint> out;
    for (double v : r.values) {
        for (const auto& m : r.methods) {
            AggregatePoint p;
            p.value = v;
            p.method = m;
            double sum = 0.0;
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& row : r.rows) {
                if (row.value != v || row.method != m) continue;
                if (!row.ok()) {
                    ++p.errors;
                    continue;
                }
                const double x = metric_of(row, metric);
                ++p.count;
                sum += x;
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            if (p.count > 0) {
                p.mean = sum / static_cast<double>(p.count);
                p.min = lo;
                p.max = hi;
            }
            out.push_back(p);
        }
    }
    return out;
}

// ---- SVG ----

inline std::string render_plot_svg(const SweepResult& r, std::string_view metric) {
    const std::vector<AggregatePoint> pts = aggregate(r, metric);
    constexpr double W = 720, H = 440, L = 80, R = 190, T = 40, B = 60;
    constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& p : pts) {
        if (p.count == 0) continue;
        x0 = std::min(x0, p.value);
        x1 = std::max(x1, p.value);
        y0 = std::min(y0, p.min);
        y1 = std::max(y1, p.max);
    }
    if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    if (x1 == x0) x0 -= 0.5 * std::max(1.0, std::abs(x0)), x1 += 0.5 * std::max(1.0, std::abs(x1));
    if (y1 == y0) y0 -= 0.5 * std::max(1.0, std::abs(y0)), y1 += 0.5 * std::max(1.0, std::abs(y1));
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    auto label = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + std::string(metric) +
         " vs " + std::string(to_string(r.parameter)) + " (seed mean, min-max band)</text>\n";
    s += "<line x1=\"" + num(L) + "\" y1=\"" + num(H - B) + "\" x2=\"" + num(W - R) + "\" y2=\"" + num(H - B) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(L) + "\" y1=\"" + num(T) + "\" x2=\"" + num(L) + "\" y2=\"" + num(H - B) +
         "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0;
        const double yv = y0 + (y1 - y0) * i / 4.0;
        s += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(H - B + 18) + "\" text-anchor=\"middle\">" + label(xv) +
             "</text>\n";
        s += "<text x=\"" + num(L - 6) + "\" y=\"" + num(sy(yv) + 4) + "\" text-anchor=\"end\">" + label(yv) +
             "</text>\n";
        s += "<line x1=\"" + num(L) + "\" y1=\"" + num(sy(yv)) + "\" x2=\"" + num(W - R) + "\" y2=\"" + num(sy(yv)) +
             "\" stroke=\"#dddddd\"/>\n";
    }
    s += "<text x=\"" + num((L + W - R) / 2) + "\" y=\"" + num(H - 18) + "\" text-anchor=\"middle\">" +
         std::string(to_string(r.parameter)) + "</text>\n";

    for (std::size_t mi = 0; mi < r.methods.size(); ++mi) {
        const std::string color = palette[mi % 6];
        std::vector<const AggregatePoint*> series;
        for (const auto& p : pts) {
            if (p.method == r.methods[mi] && p.count > 0) series.push_back(&p);
        }
        std::sort(series.begin(), series.end(), [](auto* a, auto* b) { return a->value < b->value; });
        if (series.size() > 1) {
            std::string band;
            for (const auto* p : series) band += num(sx(p->value)) + "," + num(sy(p->max)) + " ";
            for (auto it = series.rbegin(); it != series.rend(); ++it) {
                band += num(sx((*it)->value)) + "," + num(sy((*it)->min)) + " ";
            }
            band.pop_back();
            s += "<polygon points=\"" + band + "\" fill=\"" + color + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
            std::string line;
            for (const auto* p : series) line += num(sx(p->value)) + "," + num(sy(p->mean)) + " ";
            line.pop_back();
            s += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        } else if (series.size() == 1) {
            const auto* p = series.front();
            s += "<line x1=\"" + num(sx(p->value)) + "\" y1=\"" + num(sy(p->min)) + "\" x2=\"" + num(sx(p->value)) +
                 "\" y2=\"" + num(sy(p->max)) + "\" stroke=\"" + color + "\" stroke-opacity=\"0.4\"/>\n";
        }
        for (const auto* p : series) {
            s += "<circle cx=\"" + num(sx(p->value)) + "\" cy=\"" + num(sy(p->mean)) + "\" r=\"3.5\" fill=\"" + color +
                 "\"/>\n";
        }
        const double ly = T + 16 + 20.0 * mi;
        s += "<line x1=\"" + num(W - R + 14) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(W - R + 34) + "\" y2=\"" +
             num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + num(W - R + 40) + "\" y=\"" + num(ly + 4) + "\">" + r.methods[mi] + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

inline void render_plot(const SweepResult& r, std::string_view metric, const std::string& path) {
    write_text_file(path, render_plot_svg(r, metric));
}

/// Parses "start:stop:count" (inclusive, evenly spaced) or a comma-separated list.
inline std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::string cell;
        std::istringstream in(text);
        while (std::getline(in, cell, ':')) parts.push_back(cell);
        if (parts.size() != 3) throw ConfigError("values: expected start:stop:count");
        const double a = parse_number(parts[0]);
        const double b = parse_number(parts[1]);
        const long count = std::stol(parts[2]);
        if (count < 1) throw ConfigError("values: count must be >= 1");
        if (count == 1) return {a};
        for (long i = 0; i < count; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / (count - 1));
        out.back() = b;
        return out;
    }
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, ',')) {
        if (!cell.empty()) out.push_back(parse_number(cell));
    }
    if (out.empty()) throw ConfigError("values: empty list");
    return out;
}

}  // namespace semcom
