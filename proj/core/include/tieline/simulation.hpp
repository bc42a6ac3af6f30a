#pragma once

// Discrete-time closed-loop simulation of the microgrid: houses advance at
// the simulation step, agents bid ahead of each control cycle, the control
// center clears and broadcasts, and the tie-line is recorded at the record
// cycle.

#include "tieline/baseline.hpp"
#include "tieline/market.hpp"
#include "tieline/mgcc.hpp"
#include "tieline/population.hpp"
#include "tieline/traces.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tieline {

struct ScenarioConfig {
    std::size_t n_acl = 450;
    std::uint64_t seed = 1;
    double sim_step = 5.0;       // s
    double record_cycle = 10.0;  // s
    double control_cycle = 60.0; // s
    double bid_lead = 5.0;       // s ahead of the cycle start
    double duration = 86400.0;   // s, metrics horizon
    double warmup = 7200.0;      // s, simulated ahead of t = 0 with inputs held at their t = 0 values
    double wind_capacity_ratio = 0.27;
    double acl_peak_share = 0.40;
    double baseline_bias = 0.0;  // relative error injected into the baseline prediction
    bool soa_feedback_enabled = true;
    std::size_t workers = 1;     // threads used for house stepping
    double comfort_margin = 0.1; // degC beyond [T_min, T_max] tolerated before counting a violation
};

/// Throws ParameterDomainError when the timing grid is inconsistent.
void validate(const ScenarioConfig& cfg);

enum class ControlMode { controlled, uncontrolled };

/// One results row per record instant.
struct RecordRow {
    double time_s = 0.0;
    double p_g = 0.0;
    double p_g0_reference = 0.0;
    double p_g_lpf = 0.0;
    double p_ac_actual = 0.0;
    double p_ac_target = 0.0;
    double s_aggregate = 0.0;
    std::size_t n_on = 0;
};

struct BidBatchAudit {
    std::size_t k = 0;
    double bid_time_s = 0.0;
    double broadcast_time_s = 0.0;
    std::vector<Bid> bids;
    ClearingOutcome outcome;
};

struct RunResult {
    ControlMode mode = ControlMode::controlled;
    double warmup = 0.0;
    double control_cycle = 60.0;
    double record_cycle = 10.0;
    std::vector<RecordRow> rows;          // includes warm-up rows (time_s < 0)
    std::vector<CycleRecord> cycles;      // controlled runs only
    std::vector<double> cycle_start_s;    // start time of cycles[k]
    std::vector<double> bid_time_s;       // bid deadline of cycles[k]
    std::vector<BidBatchAudit> audits;    // when requested
    double comfort_violation_acl_minutes = 0.0; // t >= 0 only
    double total_acl_minutes = 0.0;
    std::size_t broadcasts = 0;
    std::size_t disaggregation_checks = 0;
    std::size_t disaggregation_mismatches = 0;
    double max_net_load_error = 0.0;      // |estimated - true (P_L - P_w)| over all cycles, kW
};

struct RunOptions {
    ControlMode mode = ControlMode::controlled;
    bool keep_bid_batches = false;
};

/// Maps the scenario onto the control-center configuration (the LPF time
/// constant and correction parameters come from `base`).
MgccConfig mgcc_config_for(const ScenarioConfig& cfg, const MgccConfig& base);

/// Runs the closed loop (or the free-running reference) over
/// [-warmup, duration). Identical inputs give bit-identical results for any
/// worker count. Throws NumericAbort when a house state turns non-finite.
RunResult run_scenario(const ScenarioConfig& cfg, std::span<const House> houses, const TraceSet& traces,
                       const BaselineModel& model, const MgccConfig& mgcc, const RunOptions& options = {});

/// Free-running (thermostat only) run; the baseline model is not consulted.
RunResult run_uncontrolled(const ScenarioConfig& cfg, std::span<const House> houses, const TraceSet& traces);

/// Free ACL power at record cadence on the trace grid (t >= 0 rows only).
std::vector<double> free_acl_power(const RunResult& uncontrolled);

struct TrainingDay {
    TraceSet traces;
    double enrolled_fraction = 1.0; // leading fraction of the population taking part that day
};

/// Free-running simulation of each day; one TrainingSample per record instant
/// after warm-up.
std::vector<TrainingSample> run_training_simulation(const ScenarioConfig& cfg, std::span<const House> houses,
                                                    std::span<const TrainingDay> days);

/// Splits a multi-day trace into daily TrainingDays, assigning
/// enrollment fractions cyclically.
std::vector<TrainingDay> split_training_days(const TraceSet& traces, std::span<const double> enrollment);

} // namespace tieline
