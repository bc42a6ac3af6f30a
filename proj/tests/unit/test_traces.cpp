#include <catch_amalgamated.hpp>

#include <tieline/errors.hpp>
#include <tieline/market.hpp>
#include <tieline/population.hpp>
#include <tieline/simulation.hpp>
#include <tieline/traces.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

using namespace tieline;
using Catch::Matchers::WithinAbs;

namespace {

double autocorrelation(const std::vector<double>& x, std::size_t lag) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += (x[i] - mean) * (x[i] - mean);
        if (i + lag < x.size()) num += (x[i] - mean) * (x[i + lag] - mean);
    }
    return num / den;
}

} // namespace

TEST_CASE("solar irradiance vanishes at night", "[traces]") {
    const TraceShape shape;
    const TraceSet tr = generate_weather(shape, 10.0, 3, 5);
    REQUIRE(tr.size() == 3 * 8640);
    for (std::size_t d = 0; d < 3; ++d) {
        CHECK(tr.solar[d * 8640] == 0.0); // midnight
        for (std::size_t i = 0; i < 8640; ++i) {
            const double h = static_cast<double>(i) * 10.0 / 3600.0;
            const double q = tr.solar[d * 8640 + i];
            CHECK(q >= 0.0);
            if (h <= shape.sunrise_hour || h >= shape.sunset_hour) CHECK(q == 0.0);
            CHECK(q <= shape.solar_peak);
        }
        // peak near solar noon
        const auto first = tr.solar.begin() + static_cast<long>(d * 8640);
        const auto peak = std::max_element(first, first + 8640) - first;
        CHECK(std::abs(static_cast<double>(peak) * 10.0 / 3600.0 - 12.5) < 1.5);
    }
}

TEST_CASE("outdoor temperature follows the summer day shape", "[traces]") {
    const TraceShape shape;
    const TraceSet tr = generate_weather(shape, 10.0, 2, 6);
    const auto [lo, hi] = std::minmax_element(tr.t_out.begin(), tr.t_out.end());
    CHECK(*lo > shape.t_out_min - shape.day_temp_spread - 1.5);
    CHECK(*hi < shape.t_out_max + shape.day_temp_spread + 1.5);
    // afternoon warmer than early morning
    CHECK(tr.t_out[15 * 360] > tr.t_out[5 * 360] + 4.0);
}

TEST_CASE("wind is mean reverting with a decaying autocorrelation", "[traces]") {
    const TraceShape shape;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const TraceSet tr = generate_traces(shape, TraceScaling{}, 10.0, 2, seed, {});
        const double r10 = autocorrelation(tr.p_wind, 60);
        CHECK(r10 > 0.0);
        CHECK(r10 < 1.0);
        CHECK(autocorrelation(tr.p_wind, 6 * 360) < r10);
        for (double w : tr.p_wind) {
            CHECK(w >= 0.0);
            CHECK(w <= tr.wind_capacity_kw + kPowerQuantum);
        }
    }
}

TEST_CASE("wind has fluctuations on the ten-minute scale", "[traces]") {
    const TraceSet tr = generate_traces(TraceShape{}, TraceScaling{}, 10.0, 1, 3, {});
    double max_swing = 0.0;
    for (std::size_t i = 60; i < tr.size(); ++i) {
        const auto [lo, hi] = std::minmax_element(tr.p_wind.begin() + static_cast<long>(i - 60),
                                                  tr.p_wind.begin() + static_cast<long>(i));
        max_swing = std::max(max_swing, *hi - *lo);
    }
    CHECK(max_swing > 0.05 * tr.wind_capacity_kw);
}

TEST_CASE("powers are on the dyadic grid", "[traces]") {
    const TraceSet tr = generate_traces(TraceShape{}, TraceScaling{}, 10.0, 1, 4, {});
    for (std::size_t i = 0; i < tr.size(); ++i) {
        CHECK(quantize_power(tr.p_load[i]) == tr.p_load[i]);
        CHECK(quantize_power(tr.p_wind[i]) == tr.p_wind[i]);
    }
}

TEST_CASE("load profile is normalised with an evening peak", "[traces]") {
    double best = 0.0, at = 0.0;
    for (int i = 0; i < 2400; ++i) {
        const double h = i / 100.0;
        const double v = load_profile(h);
        CHECK(v > 0.0);
        CHECK(v <= 1.0 + 1e-12);
        if (v > best) {
            best = v;
            at = h;
        }
    }
    CHECK_THAT(best, WithinAbs(1.0, 1e-4));
    CHECK(at > 18.0);
    CHECK(at < 22.0);
}

TEST_CASE("calibrated traces meet the system ratios", "[traces]") {
    ScenarioConfig cfg;
    PopulationSpec spec;
    const auto houses = generate_population(spec, cfg.seed);
    const TraceShape shape;
    TraceSet tr = generate_weather(shape, cfg.record_cycle, 1, cfg.seed);
    const auto free_kw = free_acl_power(run_uncontrolled(cfg, houses, tr));
    REQUIRE(free_kw.size() == tr.size());
    synthesize_load_and_wind(tr, shape, TraceScaling{}, cfg.seed, free_kw);
    const PeakRatios r = peak_ratios(tr, free_kw);
    CHECK(std::abs(r.acl_share - 0.40) <= 0.04);
    CHECK(std::abs(r.wind_ratio - 0.27) <= 0.027);
}

TEST_CASE("trace CSV round trip is exact", "[traces]") {
    const TraceSet tr = generate_traces(TraceShape{}, TraceScaling{}, 10.0, 1, 8, {});
    std::stringstream ss;
    write_traces(ss, tr);
    const TraceSet back = read_traces(ss);
    CHECK(back.step_s == tr.step_s);
    CHECK(back.t_out == tr.t_out);
    CHECK(back.solar == tr.solar);
    CHECK(back.p_load == tr.p_load);
    CHECK(back.p_wind == tr.p_wind);
}

TEST_CASE("malformed trace files are rejected", "[traces][errors]") {
    std::istringstream wrong_header("t,a,b,c,d\n0,1,2,3,4\n10,1,2,3,4\n");
    CHECK_THROWS_AS(read_traces(wrong_header), FormatError);
    std::istringstream short_row("time_s,t_out_c,solar_wm2,p_load_kw,p_wind_kw\n0,1,2,3\n10,1,2,3,4\n");
    CHECK_THROWS_AS(read_traces(short_row), FormatError);
    std::istringstream gap("time_s,t_out_c,solar_wm2,p_load_kw,p_wind_kw\n0,1,2,3,4\n10,1,2,3,4\n25,1,2,3,4\n");
    CHECK_THROWS_AS(read_traces(gap), FormatError);
    std::istringstream negative("time_s,t_out_c,solar_wm2,p_load_kw,p_wind_kw\n0,1,-2,3,4\n10,1,2,3,4\n");
    CHECK_THROWS_AS(read_traces(negative), ParameterDomainError);
}

TEST_CASE("zero-order-hold indexing and slicing", "[traces]") {
    const TraceSet tr = generate_weather(TraceShape{}, 10.0, 1, 9);
    CHECK(tr.index_at(-5.0) == 0);
    CHECK(tr.index_at(0.0) == 0);
    CHECK(tr.index_at(9.999) == 0);
    CHECK(tr.index_at(10.0) == 1);
    CHECK(tr.index_at(1e9) == tr.size() - 1);
    const TraceSet s = tr.slice(100, 50);
    CHECK(s.size() == 50);
    CHECK(s.t_out[0] == tr.t_out[100]);
    CHECK_THROWS(tr.slice(tr.size() - 10, 20));
}

TEST_CASE("invalid trace shapes", "[traces][errors]") {
    TraceShape s;
    s.t_out_max = s.t_out_min;
    CHECK_THROWS_AS(validate(s), ParameterDomainError);
    s = TraceShape{};
    s.sunset_hour = 5.0;
    CHECK_THROWS_AS(validate(s), ParameterDomainError);
    s = TraceShape{};
    s.wind_smoothing_tau_s = -1.0;
    CHECK_THROWS_AS(validate(s), ParameterDomainError);
}
