#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "semcom/kkt.hpp"
#include "semcom/optimizer.hpp"
#include "semcom/p3_solver.hpp"
#include "semcom/scenario.hpp"

using namespace semcom;

namespace {

constexpr double kN0 = 4e-21;

// One device whose uplink takes exactly one second at rho_min: rate 3.2e6 bit/s on 1 MHz.
Scenario single_device(double f_max, double h_max) {
    Scenario sc;
    sc.system = SystemParams::make(1e6, kN0, 1e-28, 0.5, 0.5, 1);
    DeviceProfile d;
    d.gain = 1e-10;
    d.cycles_device = 2e6;
    d.cycles_bs = 4e6;
    d.f_max = f_max;
    d.h_max = h_max;
    d.p_max = 1.0;
    sc.devices = {d};
    return sc;
}

double one_second_power(const Scenario& sc) {
    const double s = std::exp2(3.2) - 1.0;
    return s * kN0 * 1e6 / sc.devices[0].gain;
}

}  // namespace

TEST(MinFeasibleRho, SlackAndBinding) {
    const PsnrModel m = PsnrModel::fitted();
    DeviceProfile d;
    d.gain = 1e-11;
    EXPECT_DOUBLE_EQ(min_feasible_rho(m, d, 0.05, 4e5, kN0), 0.1);
    d.psnr_min = 35.0;
    EXPECT_NEAR(min_feasible_rho(m, d, 1e-30, 4e5, kN0), 0.27663718882603497, 1e-12);
    d.psnr_min = 36.0;
    try {
        min_feasible_rho(m, d, 1e-30, 4e5, kN0, 4);
        FAIL() << "expected InfeasibleRho";
    } catch (const InfeasibleRho& e) {
        EXPECT_EQ(e.device(), 4u);
        EXPECT_NEAR(e.rho_bar(), 0.34707515038959939, 1e-12);
    }
}

TEST(CandidateFrequency, Values) {
    EXPECT_NEAR(candidate_frequency(0.1, 0.5, 1e-28), 1e9, 1e-3);
    EXPECT_EQ(candidate_frequency(0.0, 0.5, 1e-28), 0.0);
    EXPECT_NEAR(candidate_frequency(0.5, 0.5, 1e-28), 1709975946.676697, 1e-3);
    EXPECT_THROW(candidate_frequency(0.1, 0.0, 1e-28), DegenerateWeights);
}

TEST(BetaOfDeadline, UnclampedReduction) {
    DeviceProfile d;
    d.cycles_device = 2e6;
    d.cycles_bs = 4e6;
    d.f_max = 1e12;
    d.h_max = 1e12;
    EXPECT_NEAR(beta_of_deadline(d, 1.0, 1.1122822811473741, 0.5, 1e-28), 0.5, 1e-12);
}

TEST(BetaOfDeadline, DecreasingAndVanishing) {
    DeviceProfile d;
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {1.2, 1.5, 2.0, 10.0, 1e3}) {
        const double b = beta_of_deadline(d, 1.0, t, 0.5, 1e-28);
        EXPECT_LT(b, prev);
        prev = b;
    }
    EXPECT_LT(prev, 1e-6);
    EXPECT_THROW(beta_of_deadline(d, 1.0, 1.0, 0.5, 1e-28), DeadlineInfeasible);
}

TEST(SolveP3, SingleDeviceClamped) {
    const Scenario sc = single_device(1e9, 5e9);
    const std::vector<double> p{one_second_power(sc)}, b{1e6};
    const P3Solution s = solve_p3(sc, p, b);
    EXPECT_NEAR(s.t_up[0], 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(s.freq_device[0], 1e9);
    EXPECT_NEAR(s.freq_bs[0] / 1709975946.676697, 1.0, 1e-9);
    EXPECT_NEAR(s.deadline / 1.1388548540982494, 1.0, 1e-12);
    EXPECT_NEAR(s.beta[0], 0.5, 1e-12);
    EXPECT_GT(s.alpha[0], 0.0);
    EXPECT_EQ(s.tau[0], 0.0);
}

TEST(SolveP3, IdenticalDevicesShareBeta) {
    Scenario sc;
    sc.system = SystemParams::make(4e6, kN0, 1e-28, 0.6, 0.4, 4);
    sc.devices.assign(4, DeviceProfile{});
    const std::vector<double> p(4, 0.05), b(4, 1e6);
    const P3Solution s = solve_p3(sc, p, b);
    for (double beta : s.beta) EXPECT_NEAR(beta, 0.6 / 4.0, 1e-12);
}

TEST(SolveP3, KktOnSeededScenarios) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ScenarioConfig cfg;
        cfg.seed = seed;
        const Scenario sc = sample_scenario(cfg);
        const Allocation a = average_allocation(sc);
        const P3Solution s = solve_p3(sc, a.power, a.bandwidth);
        const oracle::KktReport k = oracle::kkt_residuals_p3(sc, a.power, a.bandwidth, s);
        EXPECT_LE(k.worst(), 1e-6) << "seed " << seed;
        EXPECT_LE(k.time_equality, 1e-6);
        EXPECT_LE(k.beta_sum, 1e-9);
        for (std::size_t n = 0; n < sc.size(); ++n) {
            EXPECT_GT(s.beta[n], 0.0);
            if (s.alpha[n] > 0.0) {
                EXPECT_DOUBLE_EQ(s.freq_device[n], sc.devices[n].f_max);
            }
        }
    }
}

TEST(SolveP3, PerturbationRaisesResidual) {
    ScenarioConfig cfg;
    cfg.device_count = 10;
    const Scenario sc = sample_scenario(cfg);
    const Allocation a = average_allocation(sc);
    P3Solution s = solve_p3(sc, a.power, a.bandwidth);
    std::size_t n = 0;
    while (n < sc.size() && s.alpha[n] > 0.0) ++n;
    ASSERT_LT(n, sc.size());
    s.freq_device[n] *= 0.9;
    const oracle::KktReport k = oracle::kkt_residuals_p3(sc, a.power, a.bandwidth, s);
    EXPECT_GT(k.stationarity, 0.05);
}

TEST(SolveP3, ZeroEnergyWeightRunsFlatOut) {
    Scenario sc;
    sc.system = SystemParams::make(2e6, kN0, 1e-28, 1.0, 0.0, 2);
    sc.devices.assign(2, DeviceProfile{});
    sc.devices[1].gain = 5e-11;
    const std::vector<double> p(2, 0.05), b(2, 1e6);
    const P3Solution s = solve_p3(sc, p, b);
    EXPECT_DOUBLE_EQ(s.freq_device[0], sc.devices[0].f_max);
    EXPECT_DOUBLE_EQ(s.freq_bs[1], sc.devices[1].h_max);
    EXPECT_NEAR(s.beta[0] + s.beta[1], 1.0, 1e-15);
}

TEST(SolveP3, ZeroTimeWeightRejected) {
    Scenario sc;
    sc.system = SystemParams::make(1e6, kN0, 1e-28, 0.0, 1.0, 1);
    sc.devices = {DeviceProfile{}};
    const std::vector<double> p{0.05}, b{1e6};
    EXPECT_THROW(solve_p3(sc, p, b), DegenerateWeights);
}
