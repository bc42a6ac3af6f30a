#include "tieline/mgcc.hpp"

#include "tieline/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace tieline {

void validate(const MgccConfig& cfg) {
    if (!(cfg.tau > 0.0)) throw ParameterDomainError("tau must be positive");
    if (!(cfg.control_cycle > 0.0)) throw ParameterDomainError("control_cycle must be positive");
    validate(cfg.correction);
}

LpfOutput lpf_step(LpfState state, double p_g0, const MgccConfig& cfg) {
    if (!state.initialized) {
        return LpfOutput{p_g0, LpfState{p_g0, true}};
    }
    // same recursion as a*prev + (1-a)*x, written so that x == prev is reproduced exactly
    const double y = state.p_g_lpf_prev + (1.0 - cfg.alpha()) * (p_g0 - state.p_g_lpf_prev);
    return LpfOutput{y, LpfState{y, true}};
}

double compute_aggregate_soa(std::span<const Bid> bids) {
    if (bids.empty()) throw EmptyMarketError("compute_aggregate_soa: no bids");
    double sum = 0.0;
    for (const Bid& b : bids) sum += b.price;
    return sum / static_cast<double>(bids.size());
}

TargetPower compute_target_power(double p_base, double net_load, LpfState lpf, const MgccConfig& cfg) {
    TargetPower t;
    t.p_g0 = p_base + net_load;
    const LpfOutput f = lpf_step(lpf, t.p_g0, cfg);
    t.p_g_lpf = f.p_g_lpf;
    t.lpf = f.state;
    t.delta_p_ac = t.p_g_lpf - t.p_g0;
    t.p_ac_target = std::max(0.0, p_base + t.delta_p_ac);
    return t;
}

void check_cycle_identities(const CycleRecord& r) {
    if (r.skipped) return;
    const auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
    };
    if (!close(r.p_g0, r.p_base + r.net_load)) {
        throw InvariantViolation(fmt::format("cycle {}: p_g0 != p_base + net_load", r.k));
    }
    if (!close(r.p_ac_target, std::max(0.0, r.p_base + r.delta_p_ac))) {
        throw InvariantViolation(fmt::format("cycle {}: p_ac_target != p_base + delta_p_ac", r.k));
    }
    if (!(r.s_aggregate >= -1.0 && r.s_aggregate <= 1.0)) {
        throw InvariantViolation(fmt::format("cycle {}: aggregate SOA outside [-1, 1]", r.k));
    }
}

ControlCycleResult run_control_cycle(const ControlCycleInput& in, const BaselineModel& model,
                                     const ControllerState& state, const MgccConfig& cfg) {
    ControlCycleResult res;
    res.state = state;
    res.record.k = in.k;
    res.record.p_g_measured = in.p_g_measured;

    if (in.bids.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        CycleRecord& r = res.record;
        r.skipped = true;
        r.net_load = in.p_g_measured;
        r.p_base0 = r.p_base = r.p_g0 = r.p_g_lpf = r.delta_p_ac = r.p_ac_target = nan;
        r.s_aggregate = r.p_star = nan;
        r.committed_power = 0.0;
        return res;
    }

    const double net_load = estimate_net_load(in.p_g_measured, in.bids);
    const double s = compute_aggregate_soa(in.bids);

    double total_rated = 0.0;
    for (const Bid& b : in.bids) total_rated += b.quantity;

    const double p_base0 = predict_baseline(model, in.weather.t_out, in.weather.solar, total_rated) * in.baseline_scale;
    double p_base = p_base0;
    if (cfg.soa_feedback_enabled) {
        const CorrectedBaseline c = correct_baseline(p_base0, s, state.correction, cfg.correction);
        p_base = c.p_base;
        res.state.correction = c.state;
    }

    const TargetPower t = compute_target_power(p_base, net_load, state.lpf, cfg);
    res.state.lpf = t.lpf;

    const DemandCurve curve = build_demand_curve(in.bids);
    res.outcome = clear_market(curve, t.p_ac_target);
    res.broadcast = res.outcome.p_star;

    CycleRecord& r = res.record;
    r.net_load = net_load;
    r.p_base0 = p_base0;
    r.p_base = p_base;
    r.p_g0 = t.p_g0;
    r.p_g_lpf = t.p_g_lpf;
    r.delta_p_ac = t.delta_p_ac;
    r.p_ac_target = t.p_ac_target;
    r.s_aggregate = s;
    r.p_star = res.outcome.p_star;
    r.committed_power = res.outcome.committed_power;
    check_cycle_identities(r);
    return res;
}

void write_cycle_records(std::ostream& os, std::span<const CycleRecord> records) {
    os << "k,p_g_measured,net_load,p_base0,p_base,p_g0,p_g_lpf,p_ac_target,s_aggregate,p_star,committed_power\n";
    for (const CycleRecord& r : records) {
        os << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.k, r.p_g_measured, r.net_load, r.p_base0, r.p_base,
                          r.p_g0, r.p_g_lpf, r.p_ac_target, r.s_aggregate, r.p_star, r.committed_power);
    }
}

std::vector<CycleRecord> read_cycle_records(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("k,p_g_measured,net_load", 0) != 0) {
        throw FormatError("cycle records: missing header");
    }
    std::vector<CycleRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> v;
        std::size_t k = 0;
        bool first = true;
        while (std::getline(row, cell, ',')) {
            if (first) {
                k = std::stoull(cell);
                first = false;
            } else {
                v.push_back(std::stod(cell));
            }
        }
        if (v.size() != 10) throw FormatError("cycle records: wrong column count");
        CycleRecord r;
        r.k = k;
        r.p_g_measured = v[0];
        r.net_load = v[1];
        r.p_base0 = v[2];
        r.p_base = v[3];
        r.p_g0 = v[4];
        r.p_g_lpf = v[5];
        r.p_ac_target = v[6];
        r.s_aggregate = v[7];
        r.p_star = v[8];
        r.committed_power = v[9];
        r.skipped = std::isnan(r.p_g0);
        r.delta_p_ac = r.p_g_lpf - r.p_g0;
        out.push_back(r);
    }
    return out;
}

} // namespace tieline
