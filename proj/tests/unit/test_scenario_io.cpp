#include <catch_amalgamated.hpp>

#include <fixtures.hpp>

#include <tieline/csv_io.hpp>
#include <tieline/errors.hpp>
#include <tieline/scenario_io.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

using namespace tieline;

namespace {

void check_same(const Distribution& a, const Distribution& b) {
    REQUIRE(a.index() == b.index());
    if (const auto* u = std::get_if<UniformDist>(&a)) {
        CHECK(u->a == std::get<UniformDist>(b).a);
        CHECK(u->b == std::get<UniformDist>(b).b);
    } else {
        CHECK(std::get<NormalDist>(a).mean == std::get<NormalDist>(b).mean);
        CHECK(std::get<NormalDist>(a).stddev == std::get<NormalDist>(b).stddev);
    }
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

} // namespace

TEST_CASE("scenario round trip preserves every field", "[scenario]") {
    Scenario s;
    s.config.n_acl = 123;
    s.population.n = 123;
    s.config.seed = 987654321987ULL;
    s.config.baseline_bias = -0.1;
    s.config.soa_feedback_enabled = false;
    s.population.floor_area = UniformDist{90.5, 170.25};
    s.population.t_set = NormalDist{25.7, 0.45};
    s.population.mapping.solar_incidence_factor = 0.123456789;
    s.mgcc.tau = 45.0 * 60.0;
    s.mgcc.correction.s2 = 0.75;
    s.trace_shape.wind_fast_std = 0.0712345;
    s.training_enrollment = {1.0, 0.6};
    s.days = 2;

    std::stringstream ss;
    write_scenario(ss, s);
    const Scenario r = read_scenario(ss);
    CHECK(r.config.n_acl == 123);
    CHECK(r.population.n == 123);
    CHECK(r.config.seed == s.config.seed);
    CHECK(r.config.baseline_bias == -0.1);
    CHECK_FALSE(r.config.soa_feedback_enabled);
    CHECK_FALSE(r.mgcc.soa_feedback_enabled);
    CHECK(r.config.warmup == s.config.warmup);
    CHECK(r.config.duration == s.config.duration);
    check_same(r.population.floor_area, s.population.floor_area);
    check_same(r.population.t_set, s.population.t_set);
    check_same(r.population.r_window, s.population.r_window);
    check_same(r.population.deadband, s.population.deadband);
    CHECK(r.population.mapping.solar_incidence_factor == 0.123456789);
    CHECK(r.mgcc.tau == 2700.0);
    CHECK(r.mgcc.correction.s2 == 0.75);
    CHECK(r.mgcc.correction.gamma == 0.02);
    CHECK(r.trace_shape.wind_fast_std == 0.0712345);
    CHECK(r.trace_shape.wind_smoothing_tau_s == s.trace_shape.wind_smoothing_tau_s);
    CHECK(r.training_enrollment == s.training_enrollment);
    CHECK(r.days == 2);
    CHECK(r.traces_file == "traces.csv");
    CHECK_NOTHROW(validate(r));

    // writing the parsed scenario again gives the same text
    std::stringstream again;
    write_scenario(again, r);
    CHECK(again.str() == ss.str());
}

TEST_CASE("default scenario carries the tabulated parameters", "[scenario]") {
    std::stringstream ss;
    write_scenario(ss, Scenario{});
    const std::string text = ss.str();
    CHECK(text.find("floor_area: {uniform: [88, 176]}") != std::string::npos);
    CHECK(text.find("tau_min: 50") != std::string::npos);
    CHECK(text.find("s1: 0.5") != std::string::npos);
    CHECK(text.find("wind_capacity_ratio: 0.27") != std::string::npos);
}

TEST_CASE("missing keys keep their defaults", "[scenario]") {
    std::istringstream is("simulation:\n  n_acl: 10\n");
    const Scenario s = read_scenario(is);
    CHECK(s.config.n_acl == 10);
    CHECK(s.population.n == 10);
    CHECK(s.config.sim_step == 5.0);
    CHECK(s.mgcc.tau == 3000.0);
    std::istringstream empty("");
    CHECK(read_scenario(empty).config.n_acl == 450);
}

TEST_CASE("unknown keys and bad values are rejected", "[scenario][errors]") {
    std::istringstream typo("simulation:\n  n_acls: 10\n");
    CHECK_THROWS_AS(read_scenario(typo), FormatError);
    std::istringstream section("simulaton:\n  n_acl: 10\n");
    CHECK_THROWS_AS(read_scenario(section), FormatError);
    std::istringstream value("simulation:\n  n_acl: many\n");
    CHECK_THROWS_AS(read_scenario(value), FormatError);
    std::istringstream dist("houses:\n  floor_area: {beta: [1, 2]}\n");
    CHECK_THROWS_AS(read_scenario(dist), FormatError);
    std::istringstream arity("houses:\n  floor_area: {uniform: [1]}\n");
    CHECK_THROWS_AS(read_scenario(arity), FormatError);
    std::istringstream syntax("simulation: [unclosed\n");
    CHECK_THROWS_AS(read_scenario(syntax), FormatError);
}

TEST_CASE("scenario validation", "[scenario][errors]") {
    Scenario s;
    CHECK_NOTHROW(validate(s));
    s.population.n = 3;
    CHECK_THROWS_AS(validate(s), ParameterDomainError);
    s = Scenario{};
    s.training_enrollment = {1.0, 0.0};
    CHECK_THROWS_AS(validate(s), ParameterDomainError);
    s = Scenario{};
    s.mgcc.correction.s1 = 0.9;
    CHECK_THROWS_AS(validate(s), ParameterDomainError);
}

TEST_CASE("results CSV round trip is exact", "[csv]") {
    const auto a = testing::assemble(testing::small_scenario(10, 1.0));
    const RunResult run = testing::run_controlled(a, a.scenario.config);
    std::stringstream ss;
    write_results(ss, run.rows);
    CHECK(ss.str().rfind(std::string(kResultsHeader) + "\n", 0) == 0);
    const auto rows = read_results(ss);
    REQUIRE(rows.size() == run.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(same_bits(rows[i].time_s, run.rows[i].time_s));
        CHECK(same_bits(rows[i].p_g, run.rows[i].p_g));
        CHECK(rows[i].n_on == run.rows[i].n_on);
        CHECK((std::isnan(rows[i].p_g_lpf) == std::isnan(run.rows[i].p_g_lpf)));
    }

    const auto dir = std::filesystem::temp_directory_path() / "tieline_test_run_dir";
    std::filesystem::remove_all(dir);
    write_run_directory(dir, run);
    const RunResult back = read_run_directory(dir);
    CHECK(back.rows.size() == run.rows.size());
    CHECK(back.cycles.size() == run.cycles.size());
    CHECK(back.cycle_start_s == run.cycle_start_s);
    CHECK(back.bid_time_s == run.bid_time_s);
    CHECK(back.comfort_violation_acl_minutes == run.comfort_violation_acl_minutes);
    CHECK(back.record_cycle == run.record_cycle);
    CHECK(back.warmup == run.warmup);
    std::filesystem::remove_all(dir);
    CHECK_THROWS(read_run_directory(dir));
}
