#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "semcom/baselines.hpp"
#include "semcom/optimizer.hpp"
#include "semcom/scenario.hpp"
#include "semcom/time_split.hpp"

using namespace semcom;

TEST(InitialPoint, DefaultBoxMidpoints) {
    const Scenario sc = sample_scenario(ScenarioConfig{});
    const Allocation a = initial_feasible_point(sc);
    for (std::size_t n = 0; n < sc.size(); ++n) {
        EXPECT_DOUBLE_EQ(a.bandwidth[n], 4e5);
        EXPECT_NEAR(a.power[n], 0.05, 1e-16);
        EXPECT_DOUBLE_EQ(a.freq_device[n], 5e8);
        EXPECT_DOUBLE_EQ(a.freq_bs[n], 2.5e9);
        EXPECT_NEAR(a.rho[n], 0.2, 1e-16);
    }
    EXPECT_TRUE(check_feasibility(sc, a).ok());
}

TEST(InitialPoint, LiftsRhoForBindingFloor) {
    // Two devices at 36 dB: SNR 3 at the average point needs rho above 0.2, SNR 100 does not.
    Scenario sc;
    sc.system = SystemParams::make(2e6, 4e-21, 1e-28, 0.5, 0.5, 2);
    sc.devices.assign(2, DeviceProfile{});
    for (auto& d : sc.devices) d.psnr_min = 36.0;
    const double noise = 4e-21 * 1e6;
    sc.devices[0].gain = 3.0 * noise / 0.05;
    sc.devices[1].gain = 100.0 * noise / 0.05;
    const Allocation a = average_allocation(sc);
    EXPECT_NEAR(a.rho[0], sc.psnr_model.inverse_rho(36.0, 3.0), 1e-12);
    EXPECT_GT(a.rho[0], 0.2);
    EXPECT_NEAR(a.rho[1], 0.2, 1e-16);
    EXPECT_TRUE(check_feasibility(sc, a).ok());
}

TEST(InitialPoint, UnreachableFloorRaises) {
    ScenarioConfig cfg;
    cfg.device_count = 5;
    cfg.psnr_min_db = 200.0;
    EXPECT_THROW(average_allocation(sample_scenario(cfg)), ScenarioInfeasible);
}

TEST(Solve, SingleOuterIterationDescends) {
    const Scenario sc = sample_scenario(ScenarioConfig{.device_count = 20, .seed = 2});
    OptimizerConfig cfg;
    cfg.max_outer = 1;
    const SolveResult r = solve(sc, cfg);
    EXPECT_EQ(r.trace.outer_iterations, 1);
    EXPECT_LE(r.report.objective, r.trace.initial_objective);
    EXPECT_TRUE(check_feasibility(sc, r.allocation).ok());
}

TEST(Solve, ObjectiveNeverAboveBestHalfStep) {
    const Scenario sc = sample_scenario(ScenarioConfig{.device_count = 30, .seed = 8});
    const SolveResult r = solve(sc);
    for (const auto& e : r.trace.iterations) EXPECT_GE(e.objective, r.report.objective * (1 - 1e-12));
    EXPECT_DOUBLE_EQ(r.trace.best_objective, r.report.objective);
}

TEST(Solve, ConvergedPointIsStable) {
    const Scenario sc = sample_scenario(ScenarioConfig{.device_count = 10, .seed = 3});
    OptimizerConfig cfg;
    cfg.max_outer = 60;
    const SolveResult r = solve(sc, cfg);
    ASSERT_TRUE(r.trace.converged);
    OptimizerConfig one;
    one.max_outer = 1;
    const SolveResult again = solve_from(sc, one, r.allocation);
    EXPECT_LE(std::abs(again.report.objective - r.report.objective), 1e-3 * r.report.objective);
}

TEST(Solve, BeatsEveryBaselineOnSeedZero) {
    const Scenario sc = sample_scenario(ScenarioConfig{});
    const SolveResult r = solve(sc);
    EXPECT_TRUE(check_feasibility(sc, r.allocation).ok());
    for (BaselineKind k : kAllBaselines) {
        const Allocation b = run_baseline(k, sc, 0);
        EXPECT_LE(r.report.objective, consumption(sc, b).objective) << to_string(k);
    }
}

TEST(Solve, MultiStartNoWorse) {
    const Scenario sc = sample_scenario(ScenarioConfig{.device_count = 15, .seed = 13});
    OptimizerConfig ms;
    ms.initial_point_policy = InitialPointPolicy::MultiStart;
    EXPECT_LE(solve(sc, ms).report.objective, solve(sc).report.objective * (1 + 1e-12));
}

TEST(Solve, WithoutRebalanceStillDescends) {
    const Scenario sc = sample_scenario(ScenarioConfig{.device_count = 10, .seed = 5});
    OptimizerConfig cfg;
    cfg.rebalance_uplink = false;
    const SolveResult plain = solve(sc, cfg);
    EXPECT_LE(plain.report.objective, plain.trace.initial_objective);
    EXPECT_LE(solve(sc).report.objective, plain.report.objective * (1 + 1e-9));
}

TEST(Solve, InvalidConfigRejected) {
    const Scenario sc = sample_scenario(ScenarioConfig{.device_count = 3});
    OptimizerConfig cfg;
    cfg.eps_outer = 0.0;
    EXPECT_THROW(solve(sc, cfg), ConfigError);
}

TEST(TimeSplit, DeadlineEqualisesDevices) {
    const Scenario sc = sample_scenario(ScenarioConfig{.device_count = 12, .seed = 4});
    const Allocation a = average_allocation(sc);
    const TimeSplitSolution ts = solve_time_split(sc, a.bandwidth, a.rho);
    double beta = 0.0;
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& d = sc.devices[n];
        const double t = ts.tau[n] + compute_time(d.cycles_device, d.samples, ts.freq_device[n]) +
                         compute_time(d.cycles_bs, d.samples, ts.freq_bs[n]);
        EXPECT_NEAR(t / ts.deadline, 1.0, 1e-9);
        EXPECT_LE(ts.power[n], d.p_max * (1 + 1e-12));
        beta += ts.beta[n];
    }
    EXPECT_NEAR(beta, sc.system.weight_time, 1e-9);
}

TEST(TimeSplit, NotWorseThanInput) {
    const Scenario sc = sample_scenario(ScenarioConfig{.device_count = 25, .seed = 10});
    Allocation a = average_allocation(sc);
    const double before = consumption(sc, a).objective;
    const TimeSplitSolution ts = solve_time_split(sc, a.bandwidth, a.rho);
    a.power = ts.power;
    a.freq_device = ts.freq_device;
    a.freq_bs = ts.freq_bs;
    EXPECT_LT(consumption(sc, a).objective, before);
}

TEST(SolutionChange, RelativeInBoxUnits) {
    const Scenario sc = sample_scenario(ScenarioConfig{.device_count = 2});
    const Allocation a = average_allocation(sc);
    Allocation b = a;
    EXPECT_EQ(solution_change(sc, a, b), 0.0);
    // Scaled midpoint coordinates per device: 0.5, 0.5, 0.5, 0.5 and rho/rho_max = 2/3.
    const double norm = std::sqrt(2.0 * (4.0 * 0.25 + 4.0 / 9.0));
    b.freq_bs[1] += 0.1 * sc.devices[1].h_max;
    EXPECT_NEAR(solution_change(sc, a, b), 0.1 / norm, 1e-12);
    Allocation c = a;
    for (std::size_t n = 0; n < 2; ++n) {
        c.power[n] *= 1.01;
        c.bandwidth[n] *= 1.01;
        c.freq_device[n] *= 1.01;
        c.freq_bs[n] *= 1.01;
        c.rho[n] *= 1.01;
    }
    EXPECT_NEAR(solution_change(sc, a, c), 0.01, 1e-12);
}
