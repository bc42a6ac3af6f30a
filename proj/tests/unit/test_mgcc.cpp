#include <catch_amalgamated.hpp>

#include <tieline/errors.hpp>
#include <tieline/mgcc.hpp>
#include <tieline/rng.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

using namespace tieline;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LpfState seeded(double v) { return LpfState{v, true}; }

BaselineModel constant_model(double kw) {
    BaselineModel m;
    m.coefficients[0] = kw;
    return m;
}

const std::vector<Bid> kGoldenBids{
    Bid{0.6, 2.0, true, 1},
    Bid{0.2, 3.0, false, 2},
    Bid{-0.1, 1.5, true, 3},
    Bid{0.9, 2.5, true, 4},
};

} // namespace

TEST_CASE("filter coefficient from the tabulated time constant", "[mgcc]") {
    const MgccConfig cfg;
    CHECK(cfg.alpha() == 50.0 / 51.0);
    CHECK_THAT(lpf_step(seeded(0.0), 51.0, cfg).p_g_lpf, WithinAbs(1.0, 1e-12));
}

TEST_CASE("the first sample seeds the filter", "[mgcc]") {
    const MgccConfig cfg;
    const LpfOutput o = lpf_step(LpfState{}, 123.0, cfg);
    CHECK(o.p_g_lpf == 123.0);
    CHECK(o.state.initialized);
    CHECK(o.state.p_g_lpf_prev == 123.0);
}

TEST_CASE("constant inputs are fixed points", "[mgcc][property]") {
    const MgccConfig cfg;
    LpfState st = seeded(100.0);
    for (int k = 0; k < 1000; ++k) {
        const LpfOutput o = lpf_step(st, 100.0, cfg);
        CHECK(o.p_g_lpf == 100.0);
        st = o.state;
    }
    CounterRng rng(41, stream_id("mgcc-fixed"));
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.uniform(-1e4, 1e4);
        CHECK(lpf_step(seeded(v), v, cfg).p_g_lpf == v);
    }
}

TEST_CASE("a step converges geometrically with ratio alpha", "[mgcc]") {
    const MgccConfig cfg;
    const double a = cfg.alpha();
    LpfState st = seeded(0.0);
    for (int k = 1; k <= 400; ++k) {
        const LpfOutput o = lpf_step(st, 10.0, cfg);
        CHECK_THAT(o.p_g_lpf, WithinAbs(10.0 * (1.0 - std::pow(a, k)), 1e-10));
        st = o.state;
    }
}

TEST_CASE("sinusoid amplitude matches the discrete transfer function", "[mgcc][property]") {
    const MgccConfig cfg;
    const double a = cfg.alpha();
    for (double period_min : {5.0, 10.0, 30.0, 60.0, 240.0, 1440.0}) {
        const double w = 2.0 * std::numbers::pi / (period_min * 60.0);
        const std::complex<double> z = std::polar(1.0, -w * cfg.control_cycle);
        const double gain = std::abs((1.0 - a) / (1.0 - a * z));

        // steady-state amplitude by projecting whole periods onto the input frequency
        const int transient = 2000;
        const int steady = static_cast<int>(20.0 * period_min);
        LpfState st = seeded(0.0);
        std::complex<double> acc = 0.0;
        for (int k = 0; k < transient + steady; ++k) {
            const double x = std::sin(w * cfg.control_cycle * k);
            const LpfOutput o = lpf_step(st, x, cfg);
            st = o.state;
            if (k >= transient) acc += o.p_g_lpf * std::polar(1.0, -w * cfg.control_cycle * k);
        }
        const double peak = 2.0 * std::abs(acc) / steady;
        CHECK_THAT(peak, WithinRel(gain, 0.02));
    }
}

TEST_CASE("aggregate SOA is the mean bid price", "[mgcc]") {
    CHECK(compute_aggregate_soa(std::vector<Bid>{{0.0, 1, false, 1}, {0.0, 2, true, 2}}) == 0.0);
    CHECK(compute_aggregate_soa(std::vector<Bid>{{1.0, 1, false, 1}, {-1.0, 2, true, 2}}) == 0.0);
    CHECK_THAT(compute_aggregate_soa(std::vector<Bid>{{0.2, 1, false, 1}, {0.4, 1, false, 2}, {0.9, 1, true, 3}}),
               WithinAbs(0.5, 1e-15));
    CHECK_THROWS_AS(compute_aggregate_soa(std::vector<Bid>{}), EmptyMarketError);
}

TEST_CASE("target power chain", "[mgcc]") {
    const MgccConfig cfg;
    const TargetPower t = compute_target_power(200.0, 300.0, seeded(480.0), cfg);
    CHECK(t.p_g0 == 500.0);
    CHECK_THAT(t.p_g_lpf, WithinAbs(480.3921568627451, 1e-9));
    CHECK_THAT(t.delta_p_ac, WithinAbs(-19.6078431372549, 1e-9));
    CHECK_THAT(t.p_ac_target, WithinAbs(180.39215686274508, 1e-9));

    const TargetPower quiet = compute_target_power(200.0, 300.0, seeded(500.0), cfg);
    CHECK(quiet.delta_p_ac == 0.0);
    CHECK(quiet.p_ac_target == 200.0);

    // filter state -41 gives delta -50 for p_g0 = 10
    const TargetPower clamped = compute_target_power(10.0, 0.0, seeded(-41.0), cfg);
    CHECK_THAT(clamped.delta_p_ac, WithinAbs(-50.0, 1e-12));
    CHECK(clamped.p_ac_target == 0.0);
}

TEST_CASE("golden four-bid control cycle", "[mgcc][golden]") {
    // intercept-only model: p_base0 = 5 kW; correction state carries 1 kW;
    // S = 0.4 lies in the deadband so only the attenuation term remains
    const MgccConfig cfg;
    ControllerState st;
    st.lpf = seeded(97.0);
    st.correction.p_adj_prev = 1.0;
    ControlCycleInput in;
    in.k = 17;
    in.bids = kGoldenBids;
    in.p_g_measured = 100.0;
    in.weather = WeatherSample{30.0, 500.0};

    const ControlCycleResult r = run_control_cycle(in, constant_model(5.0), st, cfg);
    const CycleRecord& rec = r.record;
    CHECK(rec.k == 17);
    CHECK_FALSE(rec.skipped);
    CHECK(rec.net_load == 94.0);
    CHECK_THAT(rec.s_aggregate, WithinAbs(0.4, 1e-15));
    CHECK(rec.p_base0 == 5.0);
    CHECK_THAT(rec.p_base, WithinAbs(5.980198673306755, 1e-12));
    CHECK_THAT(r.state.correction.p_adj_prev, WithinAbs(0.9801986733067553, 1e-12));
    CHECK_THAT(rec.p_g0, WithinAbs(99.98019867330676, 1e-12));
    CHECK_THAT(rec.p_g_lpf, WithinAbs(97.05843526810405, 1e-12));
    CHECK_THAT(rec.delta_p_ac, WithinAbs(-2.921763405202711, 1e-12));
    CHECK_THAT(rec.p_ac_target, WithinAbs(3.0584352681040485, 1e-12));
    // curve 0.9 (2.5) | 0.6 (2) | 0.2 (3) | -0.1 (1.5): 2.5 is closer than 4.5
    CHECK(rec.committed_power == 2.5);
    CHECK(rec.p_star == 0.75);
    REQUIRE(r.broadcast.has_value());
    CHECK(*r.broadcast == 0.75);
    CHECK(r.outcome.committed_count == 1);
    CHECK(r.state.lpf.p_g_lpf_prev == rec.p_g_lpf);
}

TEST_CASE("disabling feedback passes the raw baseline through", "[mgcc]") {
    MgccConfig cfg;
    cfg.soa_feedback_enabled = false;
    ControllerState st;
    st.lpf = seeded(97.0);
    st.correction.p_adj_prev = 1.0;
    std::vector<Bid> saturated = kGoldenBids;
    for (Bid& b : saturated) b.price = 0.95;
    ControlCycleInput in;
    in.bids = saturated;
    in.p_g_measured = 100.0;
    const ControlCycleResult r = run_control_cycle(in, constant_model(5.0), st, cfg);
    CHECK(r.record.p_base == r.record.p_base0);
    CHECK(r.state.correction.p_adj_prev == 1.0);
}

TEST_CASE("quiescent fixed point", "[mgcc]") {
    const MgccConfig cfg;
    std::vector<Bid> bids = kGoldenBids;
    for (Bid& b : bids) b.price = 0.0;
    // p_base 5, net load 94 -> p_g0 99 equal to the filter state
    ControllerState st;
    st.lpf = seeded(99.0);
    ControlCycleInput in;
    in.bids = bids;
    in.p_g_measured = 100.0;
    const ControlCycleResult r = run_control_cycle(in, constant_model(5.0), st, cfg);
    CHECK(r.record.delta_p_ac == 0.0);
    CHECK(r.record.p_ac_target == r.record.p_base);
    CHECK(r.record.p_base == 5.0);
    // a single price level can only commit everything or nothing: 9 is closer to 5 than 0
    CHECK(r.outcome.sentinel == ClearingSentinel::normal);
    CHECK(r.record.committed_power == 9.0);
}

TEST_CASE("an empty batch skips the cycle", "[mgcc]") {
    const MgccConfig cfg;
    ControllerState st;
    st.lpf = seeded(42.0);
    st.correction.p_adj_prev = 0.5;
    ControlCycleInput in;
    in.k = 3;
    in.p_g_measured = 80.0;
    const ControlCycleResult r = run_control_cycle(in, constant_model(5.0), st, cfg);
    CHECK_FALSE(r.broadcast.has_value());
    CHECK(r.record.skipped);
    CHECK(std::isnan(r.record.p_star));
    CHECK(r.state.lpf.p_g_lpf_prev == 42.0);
    CHECK(r.state.correction.p_adj_prev == 0.5);
    CHECK_NOTHROW(check_cycle_identities(r.record));
}

TEST_CASE("net load is exact under truthful consumption", "[mgcc][property]") {
    CounterRng rng(42, stream_id("mgcc-netload"));
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<Bid> bids;
        double on_power = 0.0;
        const std::size_t n = 1 + rng.next_u64() % 450;
        for (std::size_t i = 0; i < n; ++i) {
            const Bid b{rng.uniform(-1, 1), quantize_power(rng.uniform(0.3, 3.5)), rng.uniform01() < 0.5,
                        static_cast<AgentId>(i)};
            if (b.on_state) on_power += b.quantity;
            bids.push_back(b);
        }
        const double net = quantize_power(rng.uniform(-300.0, 600.0));
        CHECK(estimate_net_load(net + on_power, bids) == net);
    }
}

TEST_CASE("cycle identities are enforced", "[mgcc][errors]") {
    CycleRecord r;
    r.p_base = 10;
    r.net_load = 5;
    r.p_g0 = 15;
    r.delta_p_ac = 1;
    r.p_ac_target = 11;
    r.s_aggregate = 0.2;
    CHECK_NOTHROW(check_cycle_identities(r));
    r.p_g0 = 16;
    CHECK_THROWS_AS(check_cycle_identities(r), InvariantViolation);
    r.p_g0 = 15;
    r.p_ac_target = 12;
    CHECK_THROWS_AS(check_cycle_identities(r), InvariantViolation);
    r.p_ac_target = 11;
    r.s_aggregate = 1.5;
    CHECK_THROWS_AS(check_cycle_identities(r), InvariantViolation);
}

TEST_CASE("cycle records round trip", "[mgcc]") {
    const MgccConfig cfg;
    ControllerState st;
    st.lpf = seeded(97.0);
    ControlCycleInput in;
    in.bids = kGoldenBids;
    in.p_g_measured = 100.0;
    std::vector<CycleRecord> recs{run_control_cycle(in, constant_model(5.0), st, cfg).record};
    in.bids = {};
    recs.push_back(run_control_cycle(in, constant_model(5.0), st, cfg).record);
    std::stringstream ss;
    write_cycle_records(ss, recs);
    const auto back = read_cycle_records(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].p_g_lpf == recs[0].p_g_lpf);
    CHECK(back[0].p_star == recs[0].p_star);
    CHECK_FALSE(back[0].skipped);
    CHECK(back[1].skipped);
}

TEST_CASE("invalid controller configuration", "[mgcc][errors]") {
    MgccConfig cfg;
    cfg.tau = 0.0;
    CHECK_THROWS_AS(validate(cfg), ParameterDomainError);
    cfg = MgccConfig{};
    cfg.control_cycle = -1.0;
    CHECK_THROWS_AS(validate(cfg), ParameterDomainError);
}
