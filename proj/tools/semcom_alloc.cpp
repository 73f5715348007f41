// semcom_alloc: solve, sweep, compare baselines and validate from the command line.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semcom/semcom.hpp"

namespace fs = std::filesystem;
using namespace semcom;

namespace {

RunConfig load_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, ',')) {
        if (!cell.empty()) out.push_back(cell);
    }
    return out;
}

std::vector<std::string> expand_methods(const std::string& text) {
    if (text == "all") {
        std::vector<std::string> m{std::string(kProposed)};
        for (BaselineKind k : kAllBaselines) m.emplace_back(to_string(k));
        return m;
    }
    std::vector<std::string> m = split_list(text);
    for (const auto& s : m) validate_method(s);
    return m;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create directory '" + dir + "': " + ec.message());
}

std::string allocation_csv(const Scenario& sc, const Allocation& a, const ConsumptionReport& r) {
    std::string s = "device,power_w,bandwidth_hz,freq_device_hz,freq_bs_hz,rho,t_cmp,t_up,t_bs,e_cmp,e_up,e_bs,psnr_db\n";
    const std::vector<double> q = achieved_psnr(sc, a);
    for (std::size_t n = 0; n < sc.size(); ++n) {
        s += std::to_string(n);
        for (double v : {a.power[n], a.bandwidth[n], a.freq_device[n], a.freq_bs[n], a.rho[n], r.t_cmp[n], r.t_up[n],
                         r.t_bs[n], r.e_cmp[n], r.e_up[n], r.e_bs[n], q[n]}) {
            s += ',' + format_number(v);
        }
        s += '\n';
    }
    return s;
}

int cmd_solve(const std::string& config, std::uint64_t seed, const std::string& out, bool json) {
    RunConfig rc = load_or_default(config);
    rc.scenario.seed = seed;
    const Scenario sc = sample_scenario(rc.scenario);
    const SolveResult r = solve(sc, rc.optimizer);
    if (json) {
        nlohmann::json j = to_json(r.allocation, r.report);
        j["seed"] = seed;
        j["outer_iterations"] = r.trace.outer_iterations;
        j["converged"] = r.trace.converged;
        std::cout << j.dump(2) << '\n';
    } else {
        std::printf("devices            %zu\n", sc.size());
        std::printf("objective          %.9g\n", r.report.objective);
        std::printf("completion time    %.9g s\n", r.report.t_max);
        std::printf("total energy       %.9g J\n", r.report.e_total);
        std::printf("outer iterations   %d (%s)\n", r.trace.outer_iterations,
                    r.trace.converged ? "converged" : "iteration cap reached");
        std::printf("initial objective  %.9g\n", r.trace.initial_objective);
    }
    if (!out.empty()) {
        ensure_dir(out);
        write_text_file((fs::path(out) / "allocation.csv").string(), allocation_csv(sc, r.allocation, r.report));
        nlohmann::json j = to_json(r.allocation, r.report);
        j["seed"] = seed;
        write_text_file((fs::path(out) / "solution.json").string(), j.dump(2) + "\n");
    }
    return 0;
}

int cmd_sweep(const std::string& config, const std::string& param, const std::string& values, std::uint64_t seeds,
              const std::string& methods, const std::string& out, bool plots) {
    const RunConfig rc = load_or_default(config);
    SweepSpec spec;
    spec.parameter = sweep_param_from_string(param);
    spec.values = parse_values(values);
    spec.seeds = seeds;
    spec.methods = expand_methods(methods);
    const SweepResult r = run_sweep(spec, rc.scenario, rc.optimizer);
    ensure_dir(out);
    const std::string stem = "sweep_" + param;
    write_csv(r, (fs::path(out) / (stem + ".csv")).string());
    std::size_t errors = 0;
    for (const auto& row : r.rows) errors += row.ok() ? 0 : 1;
    if (plots) {
        for (const char* metric : {"objective", "t_total", "e_total", "e_device", "e_bs"}) {
            render_plot(r, metric, (fs::path(out) / (stem + "_" + metric + ".svg")).string());
        }
    }
    std::printf("%-12s %-22s %6s %6s %14s\n", param.c_str(), "method", "runs", "errors", "mean objective");
    for (const auto& p : aggregate(r, "objective")) {
        std::printf("%-12.6g %-22s %6zu %6zu %14.8g\n", p.value, p.method.c_str(), p.count, p.errors, p.mean);
    }
    std::printf("%zu rows written to %s (%zu error rows)\n", r.rows.size(),
                (fs::path(out) / (stem + ".csv")).string().c_str(), errors);
    return 0;
}

int cmd_baselines(const std::string& config, std::uint64_t seed) {
    RunConfig rc = load_or_default(config);
    rc.scenario.seed = seed;
    const Scenario sc = sample_scenario(rc.scenario);
    std::printf("%-22s %14s %14s %14s %8s\n", "method", "objective", "time [s]", "energy [J]", "status");
    std::vector<std::string> methods{std::string(kProposed)};
    for (BaselineKind k : kAllBaselines) methods.emplace_back(to_string(k));
    for (const auto& m : methods) {
        const SweepRow row = run_method(m, sc, seed, rc.optimizer);
        std::printf("%-22s %14.8g %14.8g %14.8g %8s\n", m.c_str(), row.objective, row.t_total, row.e_total,
                    row.converged.c_str());
    }
    return 0;
}

int cmd_validate(const std::string& config, int n, int grid, std::size_t trials) {
    RunConfig rc = load_or_default(config);
    bool ok = true;

    ScenarioConfig small = rc.scenario;
    small.device_count = static_cast<std::size_t>(n);
    const validation::OracleSuite o =
        validation::run_oracle_suite(small, rc.scenario.seed, trials, grid, rc.optimizer);
    for (const auto& c : o.cases) {
        if (!c.error.empty()) {
            std::printf("  seed %-4llu error: %s\n", static_cast<unsigned long long>(c.seed), c.error.c_str());
        } else {
            std::printf("  seed %-4llu solver %.9g grid %.9g gap %+.3f%%\n", static_cast<unsigned long long>(c.seed),
                        c.solver, c.grid, 100.0 * c.gap);
        }
    }
    std::printf("oracle: %zu trials, N=%d, grid=%d, worst gap %+.3f%%, %zu failures, %.1f s\n", o.cases.size(), n,
                grid, 100.0 * o.worst_gap, o.failures, o.seconds);
    ok = ok && o.passed();

    const validation::P3Suite p3 = validation::run_p3_suite(rc.scenario, rc.scenario.seed, trials, rc.optimizer.p3);
    std::printf("rho/frequency KKT: %zu instances, worst residual %.2e, time gap %.2e, beta sum %.2e, %zu failures\n",
                p3.instances, p3.worst_kkt, p3.worst_time_equality, p3.worst_beta_sum, p3.failures);
    ok = ok && p3.passed();

    const validation::P4Suite p4 = validation::run_p4_suite(rc.scenario, rc.scenario.seed, trials, rc.optimizer);
    std::printf("power/bandwidth Newton: %zu/%zu converged, fixed-point %.2e, primal %.2e, %zu fallbacks\n",
                p4.converged, p4.instances, p4.worst_fixed_point, p4.worst_primal, p4.fallbacks);
    ok = ok && p4.converged_fraction() >= 0.95 && p4.worst_primal <= 1e-8;

    std::printf("%s\n", ok ? "validation passed" : "validation FAILED");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint power, bandwidth, frequency and compression allocation for semantic uplinks"};
    app.require_subcommand(1);

    std::string config;
    std::uint64_t seed = 0;

    auto* solve_cmd = app.add_subcommand("solve", "solve one seeded scenario");
    std::string solve_out;
    bool json = false;
    solve_cmd->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    solve_cmd->add_option("--seed", seed, "scenario seed")->required();
    solve_cmd->add_option("--out", solve_out, "directory for allocation.csv and solution.json");
    solve_cmd->add_flag("--json", json, "print the solution as JSON");

    auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep over seeded scenarios");
    std::string param, values, methods = "all", sweep_out;
    std::uint64_t seeds = 100;
    bool plots = false;
    sweep_cmd->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    sweep_cmd->add_option("--param", param, "total_bandwidth|p_max|f_max|weight_time|device_count|psnr_min")
        ->required();
    sweep_cmd->add_option("--values", values, "start:stop:count or a comma-separated list")->required();
    sweep_cmd->add_option("--seeds", seeds, "seeds per value")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--methods", methods, "comma-separated methods, or 'all'");
    sweep_cmd->add_option("--out", sweep_out, "output directory")->required();
    sweep_cmd->add_flag("--plots", plots, "also write SVG plots");

    auto* base_cmd = app.add_subcommand("baselines", "compare all methods on one scenario");
    base_cmd->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    base_cmd->add_option("--seed", seed, "scenario seed")->required();

    auto* val_cmd = app.add_subcommand("validate", "oracle and KKT suites");
    int n = 2, grid = 20;
    std::size_t trials = 10;
    val_cmd->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    val_cmd->add_option("--n", n, "devices per oracle instance")->check(CLI::Range(1, 3));
    val_cmd->add_option("--grid", grid, "grid points per dimension")->check(CLI::Range(10, 200));
    val_cmd->add_option("--trials", trials, "number of seeded instances")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve_cmd) return cmd_solve(config, seed, solve_out, json);
        if (*sweep_cmd) return cmd_sweep(config, param, values, seeds, methods, sweep_out, plots);
        if (*base_cmd) return cmd_baselines(config, seed);
        if (*val_cmd) return cmd_validate(config, n, grid, trials);
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
