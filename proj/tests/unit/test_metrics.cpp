#include <catch_amalgamated.hpp>

#include <fixtures.hpp>

#include <tieline/errors.hpp>
#include <tieline/metrics.hpp>
#include <tieline/rng.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

using namespace tieline;
using Catch::Matchers::WithinAbs;

namespace {

double naive_rate(const std::vector<double>& x, std::size_t index, std::size_t window) {
    double lo = x[index], hi = x[index];
    for (std::size_t j = index + 1 - window; j <= index; ++j) {
        lo = std::min(lo, x[j]);
        hi = std::max(hi, x[j]);
    }
    return hi - lo;
}

RunResult synthetic_run(const std::vector<double>& p_g, double warmup) {
    RunResult r;
    r.record_cycle = 10.0;
    r.warmup = warmup;
    for (std::size_t i = 0; i < p_g.size(); ++i) {
        RecordRow row;
        row.time_s = -warmup + 10.0 * static_cast<double>(i);
        row.p_g = p_g[i];
        row.p_g_lpf = 100.0;
        row.p_ac_target = std::nan("");
        r.rows.push_back(row);
    }
    return r;
}

} // namespace

TEST_CASE("a constant series does not fluctuate", "[metrics]") {
    const std::vector<double> flat(200, 42.0);
    CHECK(fluctuation_rate(flat, 30.0, 10.0) == 0.0);
    for (double v : fluctuation_series(flat, 60)) CHECK(v == 0.0);
}

TEST_CASE("alternating series fluctuates by the step", "[metrics]") {
    std::vector<double> alt;
    for (int i = 0; i < 120; ++i) alt.push_back(i % 2 == 0 ? 100.0 : 110.0);
    CHECK(fluctuation_rate(alt, 15.0, 10.0) == 10.0);
    CHECK(fluctuation_rate_at(alt, 59, 60) == 10.0);
}

TEST_CASE("insufficient history is an error", "[metrics][errors]") {
    const std::vector<double> x(100, 1.0);
    CHECK_THROWS_AS(fluctuation_rate(x, 5.0, 10.0), MetricsError);
    CHECK_THROWS_AS(fluctuation_rate_at(x, 58, 60), MetricsError);
    CHECK_NOTHROW(fluctuation_rate_at(x, 59, 60));
    CHECK_THROWS_AS(fluctuation_rate_at(x, 100, 60), MetricsError);
    CHECK(fluctuation_window(10.0) == 60);
    CHECK(fluctuation_window(5.0) == 120);
}

TEST_CASE("rolling series matches a naive window scan", "[metrics][oracle]") {
    CounterRng rng(51, stream_id("metrics-oracle"));
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(500);
        double level = 0.0;
        for (double& v : x) {
            level += rng.normal(0.0, 3.0);
            v = level + (rng.uniform01() < 0.05 ? 100.0 : 0.0);
        }
        const std::size_t window = 1 + rng.next_u64() % 90;
        const auto series = fluctuation_series(x, window);
        REQUIRE(series.size() == x.size() - window + 1);
        for (std::size_t i = window - 1; i < x.size(); ++i) {
            CHECK(series[i + 1 - window] == naive_rate(x, i, window));
            CHECK(fluctuation_rate_at(x, i, window) == naive_rate(x, i, window));
        }
    }
}

TEST_CASE("summary statistics", "[metrics]") {
    const std::vector<double> v{-1.0, 0.5, 0.95, -0.2};
    const SummaryStats s = summarize(v);
    CHECK(s.min == -1.0);
    CHECK(s.max == 0.95);
    CHECK_THAT(s.mean, WithinAbs(0.0625, 1e-15));
    CHECK_THAT(s.mean_abs, WithinAbs(0.6625, 1e-15));
    CHECK(s.max_abs == 1.0);
    CHECK(s.fraction_abs_le_0_9 == 0.5);
}

TEST_CASE("metrics reproduce a hand recomputation", "[metrics][oracle]") {
    CounterRng rng(52, stream_id("metrics-report"));
    std::vector<double> c(300), u(300);
    for (std::size_t i = 0; i < 300; ++i) {
        u[i] = 500.0 + 40.0 * std::sin(i / 7.0) + rng.normal(0.0, 5.0);
        c[i] = 500.0 + 10.0 * std::sin(i / 7.0) + rng.normal(0.0, 2.0);
    }
    const RunResult rc = synthetic_run(c, 600.0), ru = synthetic_run(u, 600.0);
    const MetricsReport m = compute_metrics(rc, ru);

    // instants: t >= 0 (index 60 on) with a full 60-sample window
    std::vector<double> fc, fu;
    std::size_t not_worse = 0;
    for (std::size_t i = 60; i < 300; ++i) {
        fc.push_back(naive_rate(c, i, 60));
        fu.push_back(naive_rate(u, i, 60));
        if (fc.back() <= fu.back()) ++not_worse;
    }
    REQUIRE(m.time_s.size() == fc.size());
    CHECK(m.time_s.front() == 0.0);
    CHECK(m.fluctuation_controlled == fc);
    CHECK(m.fluctuation_uncontrolled == fu);
    const double max_c = *std::max_element(fc.begin(), fc.end());
    const double max_u = *std::max_element(fu.begin(), fu.end());
    CHECK(m.max_fluctuation_controlled == max_c);
    CHECK(m.max_fluctuation_uncontrolled == max_u);
    CHECK_THAT(m.max_fluctuation_reduction, WithinAbs(1.0 - max_c / max_u, 1e-15));
    auto sc = fc, su = fu;
    std::sort(sc.begin(), sc.end());
    std::sort(su.begin(), su.end());
    const double med_c = 0.5 * (sc[119] + sc[120]), med_u = 0.5 * (su[119] + su[120]);
    CHECK(m.median_fluctuation_controlled == med_c);
    CHECK(m.median_fluctuation_uncontrolled == med_u);
    CHECK_THAT(m.median_fluctuation_reduction, WithinAbs(1.0 - med_c / med_u, 1e-15));
    CHECK(m.fraction_controlled_not_worse == static_cast<double>(not_worse) / 240.0);

    double ss = 0.0;
    for (std::size_t i = 60; i < 300; ++i) ss += (c[i] - 100.0) * (c[i] - 100.0);
    CHECK_THAT(m.tie_line_rmse_controlled, WithinAbs(std::sqrt(ss / 240.0), 1e-9));
    CHECK_FALSE(m.acl_tracking_rmse.has_value());
}

TEST_CASE("mismatched runs cannot be compared", "[metrics][errors]") {
    const RunResult a = synthetic_run(std::vector<double>(200, 1.0), 600.0);
    const RunResult b = synthetic_run(std::vector<double>(190, 1.0), 600.0);
    CHECK_THROWS_AS(compute_metrics(a, b), MetricsError);
    RunResult c = a;
    c.record_cycle = 5.0;
    CHECK_THROWS_AS(compute_metrics(a, c), MetricsError);
    RunResult d = a;
    d.rows[10].time_s += 1.0;
    CHECK_THROWS_AS(compute_metrics(a, d), MetricsError);
    const RunResult shortrun = synthetic_run(std::vector<double>(30, 1.0), 0.0);
    CHECK_THROWS_AS(compute_metrics(shortrun, shortrun), MetricsError);
}

TEST_CASE("a run compared with itself shows no reduction", "[metrics]") {
    const auto a = testing::assemble(testing::small_scenario(15, 1.0));
    const RunResult r = testing::run_controlled(a, a.scenario.config);
    const MetricsReport m = compute_metrics(r, r);
    CHECK(m.max_fluctuation_reduction == 0.0);
    CHECK(m.median_fluctuation_reduction == 0.0);
    CHECK(m.fraction_controlled_not_worse == 1.0);
    CHECK(m.tie_line_rmse_controlled == m.tie_line_rmse_uncontrolled);
    REQUIRE(m.acl_tracking_rmse.has_value());

    const RunResult free_run = run_uncontrolled(a.scenario.config, a.houses, a.traces);
    CHECK(compute_metrics(free_run, free_run).comfort_violation_acl_minutes_controlled == 0.0);
    const auto s = s_trajectory(r);
    CHECK(s.size() == 60);
    for (double v : s) CHECK(std::abs(v) <= 1.0);

    std::ostringstream os;
    write_metrics_report(os, m);
    CHECK(os.str().find("max_fluctuation_reduction = 0\n") != std::string::npos);
}
