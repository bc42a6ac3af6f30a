#pragma once

// Results CSV (one row per record instant) and run-directory persistence.

#include "tieline/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace tieline {

inline constexpr const char* kResultsHeader = "time_s,p_g,p_g0_reference,p_g_lpf,p_ac_actual,p_ac_target,s_aggregate,n_on";

void write_results(std::ostream& os, std::span<const RecordRow> rows);
std::vector<RecordRow> read_results(std::istream& is);

/// Cycle start times are written alongside the cycle records so a run can be
/// reloaded for metrics.
struct RunFiles {
    static constexpr const char* results = "results.csv";
    static constexpr const char* cycles = "cycles.csv";
    static constexpr const char* summary = "run_metrics.txt";
    static constexpr const char* manifest = "manifest.json";
};

/// Writes results.csv, cycles.csv and run_metrics.txt into `dir` (created if
/// missing). Throws std::runtime_error when a file cannot be written.
void write_run_directory(const std::filesystem::path& dir, const RunResult& run);

/// Loads what compute_metrics needs back from a run directory. Comfort
/// minutes come from run_metrics.txt.
RunResult read_run_directory(const std::filesystem::path& dir);

} // namespace tieline
