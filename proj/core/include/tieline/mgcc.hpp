#pragma once

// Microgrid control center loop: low-pass tie-line target, ACL target
// power, aggregate SOA and the bid -> clear -> broadcast cycle.

#include "tieline/baseline.hpp"
#include "tieline/market.hpp"
#include "tieline/thermal.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace tieline {

struct MgccConfig {
    double tau = 50.0 * 60.0;     // s
    double control_cycle = 60.0;  // s
    CorrectionParams correction{};
    bool soa_feedback_enabled = true;

    double alpha() const noexcept { return tau / (tau + control_cycle); }
};

void validate(const MgccConfig& cfg);

struct LpfState {
    double p_g_lpf_prev = 0.0;
    bool initialized = false;
};

struct LpfOutput {
    double p_g_lpf = 0.0;
    LpfState state;
};

/// First-order recursive low-pass filter; the first sample seeds the state.
LpfOutput lpf_step(LpfState state, double p_g0, const MgccConfig& cfg);

/// Mean bid price. Throws EmptyMarketError on an empty batch.
double compute_aggregate_soa(std::span<const Bid> bids);

struct TargetPower {
    double p_ac_target = 0.0;
    double p_g0 = 0.0;
    double p_g_lpf = 0.0;
    double delta_p_ac = 0.0;
    LpfState lpf;
};

/// p_g0 = p_base + net_load, filtered; the ACL target is the baseline plus
/// the high-frequency residual, clamped at zero.
TargetPower compute_target_power(double p_base, double net_load, LpfState lpf, const MgccConfig& cfg);

struct CycleRecord {
    std::size_t k = 0;
    bool skipped = false;
    double p_g_measured = 0.0;
    double net_load = 0.0;
    double p_base0 = 0.0;
    double p_base = 0.0;
    double p_g0 = 0.0;
    double p_g_lpf = 0.0;
    double delta_p_ac = 0.0;
    double p_ac_target = 0.0;
    double s_aggregate = 0.0;
    double p_star = 0.0;
    double committed_power = 0.0;
};

/// Throws InvariantViolation when the record's internal identities fail.
void check_cycle_identities(const CycleRecord& r);

struct ControllerState {
    LpfState lpf;
    CorrectionState correction;
};

struct ControlCycleInput {
    std::size_t k = 0;
    std::span<const Bid> bids;
    double p_g_measured = 0.0;   // tie-line reading at the bid deadline, kW
    WeatherSample weather;
    double baseline_scale = 1.0; // deliberate estimation error multiplier
};

struct ControlCycleResult {
    std::optional<double> broadcast; // p_star, absent for a skipped cycle
    ClearingOutcome outcome;
    CycleRecord record;
    ControllerState state;
};

/// One market cycle: net load from the tie-line reading, aggregate SOA,
/// baseline prediction and (optionally) correction, target power, clearing.
/// An empty bid batch skips the cycle and leaves the state untouched.
ControlCycleResult run_control_cycle(const ControlCycleInput& in, const BaselineModel& model,
                                     const ControllerState& state, const MgccConfig& cfg);

/// Header: k,p_g_measured,net_load,p_base0,p_base,p_g0,p_g_lpf,p_ac_target,s_aggregate,p_star,committed_power
void write_cycle_records(std::ostream& os, std::span<const CycleRecord> records);
std::vector<CycleRecord> read_cycle_records(std::istream& is);

} // namespace tieline
