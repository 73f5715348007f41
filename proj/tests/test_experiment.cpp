#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "semcom/experiment.hpp"

using namespace semcom;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

SweepResult small_sweep(unsigned threads) {
    SweepSpec spec;
    spec.parameter = SweepParam::TotalBandwidth;
    spec.values = {5e6, 10e6, 20e6};
    spec.seeds = 3;
    spec.methods = {"proposed", "average_allocation"};
    spec.threads = threads;
    ScenarioConfig base;
    base.device_count = 8;
    return run_sweep(spec, base, OptimizerConfig{});
}

}  // namespace

TEST(SweepSpec, Validation) {
    SweepSpec s;
    EXPECT_THROW(s.validate(), ConfigError);
    s.values = {1.0, 3.0, 2.0};
    EXPECT_THROW(s.validate(), ConfigError);
    s.values = {3.0, 2.0, 1.0};
    EXPECT_NO_THROW(s.validate());
    s.values = {1.0, 1.0};
    EXPECT_THROW(s.validate(), ConfigError);
    s.values = {1.0};
    s.seeds = 0;
    EXPECT_THROW(s.validate(), ConfigError);
    s.seeds = 1;
    s.methods = {"bogus"};
    EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Sweep, SingleRow) {
    SweepSpec spec;
    spec.values = {20e6};
    spec.seeds = 1;
    ScenarioConfig base;
    base.device_count = 5;
    const SweepResult r = run_sweep(spec, base, OptimizerConfig{});
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(r.rows[0].method, "proposed");
    EXPECT_TRUE(r.rows[0].ok());
}

TEST(Sweep, RowCountAndOrder) {
    const SweepResult r = small_sweep(1);
    ASSERT_EQ(r.rows.size(), 3u * 3u * 2u);
    std::size_t i = 0;
    for (double v : {5e6, 10e6, 20e6}) {
        for (std::uint64_t s = 0; s < 3; ++s) {
            for (const char* m : {"proposed", "average_allocation"}) {
                EXPECT_EQ(r.rows[i].value, v);
                EXPECT_EQ(r.rows[i].seed, s);
                EXPECT_EQ(r.rows[i].method, m);
                ++i;
            }
        }
    }
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
    EXPECT_EQ(to_csv(small_sweep(1)), to_csv(small_sweep(4)));
    EXPECT_EQ(render_plot_svg(small_sweep(1), "objective"), render_plot_svg(small_sweep(3), "objective"));
}

TEST(Sweep, ErrorsBecomeRows) {
    SweepSpec spec;
    spec.parameter = SweepParam::PsnrMin;
    spec.values = {25.0, 300.0};
    spec.seeds = 2;
    spec.methods = {"proposed", "random_allocation"};
    ScenarioConfig base;
    base.device_count = 4;
    const SweepResult r = run_sweep(spec, base, OptimizerConfig{});
    ASSERT_EQ(r.rows.size(), 8u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(r.rows[i].ok());
    for (std::size_t i = 4; i < 8; ++i) {
        EXPECT_FALSE(r.rows[i].ok());
        EXPECT_EQ(r.rows[i].converged.rfind("error:", 0), 0u);
        EXPECT_TRUE(std::isnan(r.rows[i].objective));
    }
}

TEST(Sweep, ParameterOverrides) {
    ScenarioConfig base;
    EXPECT_EQ(apply_param(base, SweepParam::DeviceCount, 30).device_count, 30u);
    EXPECT_THROW(apply_param(base, SweepParam::DeviceCount, 2.5), ConfigError);
    const ScenarioConfig w = apply_param(base, SweepParam::WeightTime, 0.3);
    EXPECT_DOUBLE_EQ(w.weight_time, 0.3);
    EXPECT_DOUBLE_EQ(w.weight_energy, 0.7);
    EXPECT_DOUBLE_EQ(apply_param(base, SweepParam::PMax, 12).p_max_dbm, 12.0);
    EXPECT_DOUBLE_EQ(apply_param(base, SweepParam::FMax, 5e8).f_max_hz, 5e8);
    EXPECT_DOUBLE_EQ(apply_param(base, SweepParam::PsnrMin, 31).psnr_min_db, 31.0);
    for (SweepParam p : kAllSweepParams) EXPECT_EQ(sweep_param_from_string(to_string(p)), p);
}

TEST(Csv, EmptyResultIsHeaderOnly) {
    SweepResult r;
    EXPECT_EQ(to_csv(r), std::string(kCsvHeader) + "\n");
}

TEST(Csv, RoundTrip) {
    const SweepResult r = small_sweep(1);
    const std::string text = to_csv(r);
    const SweepResult back = parse_csv(text);
    EXPECT_EQ(to_csv(back), text);
    ASSERT_EQ(back.rows.size(), r.rows.size());
    EXPECT_EQ(back.parameter, r.parameter);
    EXPECT_EQ(back.values, r.values);
    EXPECT_EQ(back.methods, r.methods);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        EXPECT_NEAR(back.rows[i].objective, r.rows[i].objective, 1e-11 * r.rows[i].objective);
        EXPECT_EQ(back.rows[i].iters, r.rows[i].iters);
        EXPECT_EQ(back.rows[i].converged, r.rows[i].converged);
    }
}

TEST(Csv, TwelveSignificantDigits) {
    EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(format_number(std::nan("")), "nan");
    EXPECT_EQ(format_number(2e7), "20000000");
}

TEST(Csv, FileBytesAreStable) {
    const auto dir = std::filesystem::temp_directory_path() / "semcom_csv_test";
    std::filesystem::create_directories(dir);
    const SweepResult r = small_sweep(2);
    write_csv(r, (dir / "a.csv").string());
    write_csv(small_sweep(2), (dir / "b.csv").string());
    EXPECT_EQ(slurp((dir / "a.csv").string()), slurp((dir / "b.csv").string()));
    EXPECT_EQ(to_csv(read_csv((dir / "a.csv").string())), to_csv(r));
    EXPECT_THROW(write_csv(r, (dir / "missing" / "x.csv").string()), Error);
    std::filesystem::remove_all(dir);
}

TEST(Csv, RejectsMalformed) {
    EXPECT_THROW(parse_csv("a,b\n"), Error);
    EXPECT_THROW(parse_csv(std::string(kCsvHeader) + "\ntotal_bandwidth,1,0,proposed\n"), Error);
}

TEST(Values, Parsing) {
    EXPECT_EQ(parse_values("1:5:5"), (std::vector<double>{1, 2, 3, 4, 5}));
    EXPECT_EQ(parse_values("0.1,0.3"), (std::vector<double>{0.1, 0.3}));
    EXPECT_EQ(parse_values("7:9:1"), (std::vector<double>{7}));
    EXPECT_THROW(parse_values("1:2"), ConfigError);
    EXPECT_THROW(parse_values("1:2:0"), ConfigError);
}

TEST(Aggregate, MeanMinMax) {
    SweepResult r;
    r.values = {1.0};
    r.methods = {"proposed"};
    for (double obj : {1.0, 2.0, 6.0}) {
        SweepRow row;
        row.value = 1.0;
        row.method = "proposed";
        row.objective = obj;
        row.converged = "true";
        r.rows.push_back(row);
    }
    SweepRow bad;
    bad.value = 1.0;
    bad.method = "proposed";
    bad.converged = "error:model";
    r.rows.push_back(bad);
    const auto a = aggregate(r, "objective");
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].count, 3u);
    EXPECT_EQ(a[0].errors, 1u);
    EXPECT_DOUBLE_EQ(a[0].mean, 3.0);
    EXPECT_DOUBLE_EQ(a[0].min, 1.0);
    EXPECT_DOUBLE_EQ(a[0].max, 6.0);
    EXPECT_THROW(aggregate(r, "speed"), ConfigError);
}

TEST(Plot, SinglePointHasMarkerOnly) {
    SweepSpec spec;
    spec.values = {20e6};
    spec.seeds = 1;
    ScenarioConfig base;
    base.device_count = 3;
    const std::string svg = render_plot_svg(run_sweep(spec, base, OptimizerConfig{}), "objective");
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_EQ(svg.find("<polyline"), std::string::npos);
    EXPECT_NE(svg.find("<circle"), std::string::npos);
}

TEST(Plot, UnknownMetricIsUsageError) {
    EXPECT_THROW(render_plot_svg(SweepResult{}, "latency"), ConfigError);
}

TEST(Plot, PolylineFollowsCsvMeans) {
    const SweepResult r = small_sweep(1);
    const std::string svg = render_plot_svg(r, "objective");
    // First polyline is the proposed method; its y coordinates must order like the CSV means.
    const std::regex poly("<polyline points=\"([^\"]+)\"");
    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, poly));
    std::vector<double> ys;
    std::istringstream in(m[1].str());
    std::string pair;
    while (in >> pair) ys.push_back(std::stod(pair.substr(pair.find(',') + 1)));
    std::vector<double> means;
    for (const auto& p : aggregate(r, "objective")) {
        if (p.method == "proposed") means.push_back(p.mean);
    }
    ASSERT_EQ(ys.size(), means.size());
    for (std::size_t i = 1; i < ys.size(); ++i) {
        // SVG y grows downwards.
        EXPECT_EQ(means[i] < means[i - 1], ys[i] > ys[i - 1]);
    }
    const double y_span = ys.front() - ys.back();
    const double m_span = means.front() - means.back();
    for (std::size_t i = 0; i < ys.size(); ++i) {
        EXPECT_NEAR((ys.front() - ys[i]) / y_span, (means.front() - means[i]) / m_span, 1e-3);
    }
}
