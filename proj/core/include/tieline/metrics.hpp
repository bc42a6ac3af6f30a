#pragma once

// Tie-line fluctuation and tracking metrics for paired controlled /
// uncontrolled runs.

#include "tieline/simulation.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace tieline {

/// Max minus min of p_g over the trailing window (index - window, index],
/// i.e. the `window` samples ending at `index`. Throws MetricsError when
/// fewer than `window` samples precede and include `index`.
double fluctuation_rate_at(std::span<const double> p_g, std::size_t index, std::size_t window);

/// The same at time t_min (minutes from the first sample) for a series
/// sampled every record_cycle_s seconds, over a 10-minute window.
double fluctuation_rate(std::span<const double> p_g, double t_min, double record_cycle_s);

/// Rolling max-min for every index >= window - 1 (monotone deques, O(n)).
std::vector<double> fluctuation_series(std::span<const double> p_g, std::size_t window);

struct SummaryStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double mean_abs = 0.0;
    double max_abs = 0.0;
    double fraction_abs_le_0_9 = 0.0;
};

SummaryStats summarize(std::span<const double> values);

struct MetricsReport {
    std::vector<double> time_s;                 // metric instants (t >= 0)
    std::vector<double> fluctuation_controlled; // kW
    std::vector<double> fluctuation_uncontrolled;
    double max_fluctuation_controlled = 0.0;
    double max_fluctuation_uncontrolled = 0.0;
    double median_fluctuation_controlled = 0.0;
    double median_fluctuation_uncontrolled = 0.0;
    double max_fluctuation_reduction = 0.0;    // 1 - max_c / max_u
    double median_fluctuation_reduction = 0.0;
    double fraction_controlled_not_worse = 0.0; // share of instants with controlled <= uncontrolled
    double tie_line_rmse_controlled = 0.0;      // P_g vs P_gLPF
    double tie_line_rmse_uncontrolled = 0.0;
    std::optional<double> acl_tracking_rmse;    // P_AC vs P_AC*, controlled runs only
    double comfort_violation_acl_minutes_controlled = 0.0;
    double comfort_violation_acl_minutes_uncontrolled = 0.0;
    double comfort_violation_fraction_controlled = 0.0;
    SummaryStats s_controlled;   // per control cycle (record rows when no cycles)
    SummaryStats s_uncontrolled;
};

/// Window length in samples for the 10-minute fluctuation rate.
std::size_t fluctuation_window(double record_cycle_s);

/// Throws MetricsError when the runs differ in length or timing.
MetricsReport compute_metrics(const RunResult& controlled, const RunResult& uncontrolled);

/// Aggregate SOA per control cycle after warm-up (from the bid batches), or
/// per record row for runs without market cycles.
std::vector<double> s_trajectory(const RunResult& run);

void write_metrics_report(std::ostream& os, const MetricsReport& m);

} // namespace tieline
