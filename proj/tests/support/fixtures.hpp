#pragma once

// Shared scenario construction for the simulation tests and the acceptance
// suite: population, calibrated traces and a trained baseline model.

#include <tieline/baseline.hpp>
#include <tieline/rng.hpp>
#include <tieline/scenario_io.hpp>
#include <tieline/simulation.hpp>

#include <vector>

namespace tieline::testing {

struct Assembled {
    Scenario scenario;
    std::vector<House> houses;
    TraceSet traces;
    std::vector<double> free_kw; // free ACL power on the trace grid
    BaselineModel model;
    std::vector<TrainingSample> training;
};

/// Same pipeline as `tieline gen-scenario` followed by `tieline train`.
inline Assembled assemble(Scenario s) {
    Assembled a;
    s.population.n = s.config.n_acl;
    a.houses = generate_population(s.population, s.config.seed);
    a.traces = generate_weather(s.trace_shape, s.config.record_cycle, s.days, s.config.seed);
    // calibration needs the free ACL power over the whole trace, not just the run horizon
    ScenarioConfig calibration = s.config;
    calibration.duration = a.traces.duration_s();
    const RunResult free_run = run_uncontrolled(calibration, a.houses, a.traces);
    a.free_kw = free_acl_power(free_run);
    const TraceScaling scaling{s.config.wind_capacity_ratio, s.config.acl_peak_share};
    synthesize_load_and_wind(a.traces, s.trace_shape, scaling, s.config.seed, a.free_kw);

    const std::uint64_t training_seed = CounterRng(s.config.seed, stream_id("training-traces")).next_u64();
    const TraceSet training =
        generate_traces(s.trace_shape, scaling, s.config.record_cycle, s.training_days, training_seed, {});
    a.training = run_training_simulation(s.config, a.houses, split_training_days(training, s.training_enrollment));
    a.model = fit_baseline_model(a.training);
    a.scenario = std::move(s);
    return a;
}

inline Assembled assemble_default(std::uint64_t seed = 1) {
    Scenario s;
    s.config.seed = seed;
    return assemble(s);
}

/// A few-house, few-hour scenario for fast engine tests.
inline Scenario small_scenario(std::size_t n = 20, double hours = 2.0) {
    Scenario s;
    s.config.n_acl = n;
    s.population.n = n;
    s.config.duration = hours * 3600.0;
    s.config.warmup = 1800.0;
    s.training_days = 2;
    s.training_enrollment = {1.0, 0.7};
    return s;
}

inline RunResult run_controlled(const Assembled& a, const ScenarioConfig& cfg, const RunOptions& opt = {}) {
    return run_scenario(cfg, a.houses, a.traces, a.model, mgcc_config_for(cfg, a.scenario.mgcc), opt);
}

} // namespace tieline::testing
