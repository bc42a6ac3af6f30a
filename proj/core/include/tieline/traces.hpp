#pragma once

// Synthetic weather, uncontrollable-load and wind traces on a uniform time
// grid.

#include "tieline/thermal.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace tieline {

struct TraceSet {
    double step_s = 10.0;
    std::vector<double> t_out;  // degC
    std::vector<double> solar;  // W/m^2
    std::vector<double> p_load; // kW, uncontrollable load P_L
    std::vector<double> p_wind; // kW, wind generation P_w
    double wind_capacity_kw = 0.0; // installed capacity when known (not serialised)

    std::size_t size() const noexcept { return t_out.size(); }
    double duration_s() const noexcept { return step_s * static_cast<double>(size()); }
    WeatherSample weather(std::size_t i) const { return WeatherSample{t_out[i], solar[i]}; }

    /// Zero-order-hold index for time t (clamped to the grid).
    std::size_t index_at(double t) const noexcept;

    /// Samples [first, first + count).
    TraceSet slice(std::size_t first, std::size_t count) const;
};

void validate(const TraceSet& traces);

/// Shape parameters of the synthetic summer-day generator.
struct TraceShape {
    // outdoor temperature: cosine segments between the daily minimum and maximum
    double t_out_min = 26.0;
    double t_out_max = 34.0;
    double t_out_min_hour = 5.0;
    double t_out_max_hour = 15.0;
    double day_temp_spread = 1.0;  // per-day uniform offset of both extremes, +/- degC
    double t_out_noise = 0.2;      // degC, slow Ornstein-Uhlenbeck component
    // solar: half-sine between sunrise and sunset with slow cloud dimming
    double solar_peak = 850.0;
    double sunrise_hour = 6.0;
    double sunset_hour = 19.0;
    double cloud_depth = 0.15;
    // uncontrollable load
    double load_peak_kw = 300.0;   // used only when no free ACL series is given for calibration
    double load_noise = 0.01;      // relative
    // wind, normalised to installed capacity
    double wind_mean = 0.45;
    double wind_slow_tau_s = 3.0 * 3600.0;
    double wind_slow_std = 0.15;
    double wind_fast_tau_s = 600.0;
    double wind_fast_std = 0.07;
    double wind_smoothing_tau_s = 120.0; // first-order lag of the farm output, 0 disables
};

void validate(const TraceShape& shape);

/// Normalised diurnal load profile in (0, 1], peak 1 in the evening.
double load_profile(double hour_of_day);

/// Outdoor temperature and solar irradiance for `days` days at `step_s`
/// cadence; load and wind series are left zero.
TraceSet generate_weather(const TraceShape& shape, double step_s, std::size_t days, std::uint64_t seed);

struct TraceScaling {
    double wind_capacity_ratio = 0.27; // installed wind / system peak load
    double acl_peak_share = 0.40;      // ACL share of the system peak load
};

/// Fills p_load and p_wind of `traces`. When `acl_free_kw` (same grid) is
/// non-empty, the load is scaled so that the free ACL power makes up
/// `acl_peak_share` of the peak of P_L + P_AC; the wind capacity is then
/// `wind_capacity_ratio` of that peak.
void synthesize_load_and_wind(TraceSet& traces, const TraceShape& shape, const TraceScaling& scaling,
                              std::uint64_t seed, std::span<const double> acl_free_kw);

/// generate_weather followed by synthesize_load_and_wind.
TraceSet generate_traces(const TraceShape& shape, const TraceScaling& scaling, double step_s, std::size_t days,
                         std::uint64_t seed, std::span<const double> acl_free_kw);

struct PeakRatios {
    double system_peak_kw = 0.0;
    double acl_share = 0.0;   // P_AC / (P_L + P_AC) at the system peak instant
    double wind_ratio = 0.0;  // installed wind (or max wind if unknown) / system peak
};

PeakRatios peak_ratios(const TraceSet& traces, std::span<const double> acl_free_kw);

/// CSV with header time_s,t_out_c,solar_wm2,p_load_kw,p_wind_kw.
void write_traces(std::ostream& os, const TraceSet& traces);
TraceSet read_traces(std::istream& is);

} // namespace tieline
