#include <benchmark/benchmark.h>

#include <tieline/market.hpp>
#include <tieline/metrics.hpp>
#include <tieline/mgcc.hpp>
#include <tieline/population.hpp>
#include <tieline/rng.hpp>
#include <tieline/simulation.hpp>
#include <tieline/thermal.hpp>
#include <tieline/traces.hpp>

#include <vector>

using namespace tieline;

namespace {

std::vector<Bid> random_bids(std::size_t n) {
    CounterRng rng(1, stream_id("bench-bids"));
    std::vector<Bid> bids;
    bids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        bids.push_back(Bid{rng.uniform(-1.0, 1.0), quantize_power(rng.uniform(0.3, 3.5)), rng.uniform01() < 0.5,
                           static_cast<AgentId>(i)});
    }
    return bids;
}

void BM_EtpStep(benchmark::State& state) {
    const EtpParameters p = derive_etp_params(HouseGeometry{});
    const EtpStepper stepper(p, 5.0);
    ThermalState s{26.0, 26.0};
    bool on = false;
    for (auto _ : state) {
        s = stepper.step(s, WeatherSample{32.0, 600.0}, on);
        on = s.t_air > 26.0;
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_EtpStep);

void BM_ClearMarket(benchmark::State& state) {
    const auto bids = random_bids(static_cast<std::size_t>(state.range(0)));
    double target = 0.0;
    for (const Bid& b : bids) target += 0.4 * b.quantity;
    for (auto _ : state) {
        const DemandCurve curve = build_demand_curve(bids);
        benchmark::DoNotOptimize(clear_market(curve, target));
    }
}
BENCHMARK(BM_ClearMarket)->Arg(45)->Arg(450)->Arg(4500);

void BM_ControlCycle(benchmark::State& state) {
    const auto bids = random_bids(450);
    BaselineModel model;
    model.coefficients[0] = 200.0;
    const MgccConfig cfg;
    ControllerState st;
    ControlCycleInput in;
    in.bids = bids;
    in.p_g_measured = 900.0;
    in.weather = WeatherSample{32.0, 600.0};
    for (auto _ : state) {
        const ControlCycleResult r = run_control_cycle(in, model, st, cfg);
        st = r.state;
        benchmark::DoNotOptimize(r.record.p_star);
    }
}
BENCHMARK(BM_ControlCycle);

void BM_FluctuationSeries(benchmark::State& state) {
    CounterRng rng(2, stream_id("bench-series"));
    std::vector<double> x(8640);
    for (double& v : x) v = rng.normal(500.0, 20.0);
    for (auto _ : state) benchmark::DoNotOptimize(fluctuation_series(x, 60));
}
BENCHMARK(BM_FluctuationSeries);

void BM_UncontrolledHour(benchmark::State& state) {
    PopulationSpec spec;
    spec.n = static_cast<std::size_t>(state.range(0));
    const auto houses = generate_population(spec, 1);
    const TraceSet traces = generate_traces(TraceShape{}, TraceScaling{}, 10.0, 1, 1, {});
    ScenarioConfig cfg;
    cfg.n_acl = spec.n;
    cfg.duration = 3600.0;
    cfg.warmup = 0.0;
    for (auto _ : state) benchmark::DoNotOptimize(run_uncontrolled(cfg, houses, traces).rows.size());
    state.SetItemsProcessed(state.iterations() * static_cast<long>(spec.n) * 720);
}
BENCHMARK(BM_UncontrolledHour)->Arg(450)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
