#include "tieline/traces.hpp"

#include "tieline/errors.hpp"
#include "tieline/market.hpp"
#include "tieline/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace tieline {

namespace {

constexpr double kDay = 86400.0;

// exact discretisation of an Ornstein-Uhlenbeck process with stationary std
class OuProcess {
public:
    OuProcess(double tau, double stddev, double dt, CounterRng& rng)
        : decay_(std::exp(-dt / tau)), kick_(stddev * std::sqrt(1.0 - std::exp(-2.0 * dt / tau))),
          x_(stddev * rng.standard_normal()) {}

    double value() const noexcept { return x_; }
    double advance(CounterRng& rng) {
        x_ = decay_ * x_ + kick_ * rng.standard_normal();
        return x_;
    }

private:
    double decay_;
    double kick_;
    double x_;
};

double raw_load_profile(double h) {
    const auto bump = [h](double centre, double width) {
        double d = std::fmod(h - centre + 36.0, 24.0) - 12.0; // circular distance in hours
        return std::exp(-(d / width) * (d / width));
    };
    return 0.55 + 0.22 * bump(9.0, 2.5) + 0.18 * bump(14.0, 3.0) + 0.42 * bump(20.0, 2.2);
}

double load_profile_max() {
    static const double peak = [] {
        double m = 0.0;
        for (int i = 0; i < 24 * 600; ++i) m = std::max(m, raw_load_profile(i / 600.0));
        return m;
    }();
    return peak;
}

double cosine_blend(double from, double to, double fraction) {
    return from + (to - from) * 0.5 * (1.0 - std::cos(std::numbers::pi * fraction));
}

} // namespace

std::size_t TraceSet::index_at(double t) const noexcept {
    if (t <= 0.0 || size() == 0) return 0;
    const auto i = static_cast<std::size_t>(std::floor(t / step_s + 1e-9));
    return std::min(i, size() - 1);
}

TraceSet TraceSet::slice(std::size_t first, std::size_t count) const {
    TraceSet out;
    out.step_s = step_s;
    out.wind_capacity_kw = wind_capacity_kw;
    const auto take = [&](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first),
                                   v.begin() + static_cast<std::ptrdiff_t>(first + count));
    };
    if (first + count > size()) throw std::out_of_range("TraceSet::slice out of range");
    out.t_out = take(t_out);
    out.solar = take(solar);
    out.p_load = take(p_load);
    out.p_wind = take(p_wind);
    return out;
}

void validate(const TraceSet& traces) {
    const std::size_t n = traces.size();
    if (!(traces.step_s > 0.0)) throw ParameterDomainError("traces: step must be positive");
    if (traces.solar.size() != n || traces.p_load.size() != n || traces.p_wind.size() != n) {
        throw ParameterDomainError("traces: series lengths differ");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(traces.t_out[i]) || !std::isfinite(traces.p_load[i])) {
            throw ParameterDomainError(fmt::format("traces: non-finite value at sample {}", i));
        }
        if (!(traces.solar[i] >= 0.0)) throw ParameterDomainError(fmt::format("traces: negative solar at {}", i));
        if (!(traces.p_wind[i] >= 0.0)) throw ParameterDomainError(fmt::format("traces: negative wind at {}", i));
    }
}

void validate(const TraceShape& s) {
    if (!(s.t_out_max > s.t_out_min)) throw ParameterDomainError("trace shape: t_out_max must exceed t_out_min");
    if (!(s.t_out_min_hour >= 0.0 && s.t_out_min_hour < s.t_out_max_hour && s.t_out_max_hour < 24.0)) {
        throw ParameterDomainError("trace shape: need 0 <= t_out_min_hour < t_out_max_hour < 24");
    }
    if (!(s.sunrise_hour >= 0.0 && s.sunrise_hour < s.sunset_hour && s.sunset_hour <= 24.0)) {
        throw ParameterDomainError("trace shape: need 0 <= sunrise < sunset <= 24");
    }
    if (!(s.solar_peak >= 0.0) || !(s.cloud_depth >= 0.0 && s.cloud_depth < 1.0)) {
        throw ParameterDomainError("trace shape: invalid solar parameters");
    }
    if (!(s.wind_slow_tau_s > 0.0 && s.wind_fast_tau_s > 0.0 && s.wind_slow_std >= 0.0 && s.wind_fast_std >= 0.0 &&
          s.wind_smoothing_tau_s >= 0.0)) {
        throw ParameterDomainError("trace shape: invalid wind process parameters");
    }
    if (!(s.load_peak_kw > 0.0)) throw ParameterDomainError("trace shape: load_peak_kw must be positive");
}

double load_profile(double hour_of_day) {
    return raw_load_profile(hour_of_day) / load_profile_max();
}

TraceSet generate_weather(const TraceShape& shape, double step_s, std::size_t days, std::uint64_t seed) {
    validate(shape);
    if (!(step_s > 0.0)) throw ParameterDomainError("generate_weather: step must be positive");
    const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(days) * kDay / step_s));

    TraceSet tr;
    tr.step_s = step_s;
    tr.t_out.resize(n);
    tr.solar.resize(n);
    tr.p_load.assign(n, 0.0);
    tr.p_wind.assign(n, 0.0);

    // daily extremes for days -1 .. days so segments crossing midnight are continuous
    CounterRng day_rng(seed, stream_id("weather-days"));
    std::vector<double> offsets(days + 2);
    for (double& o : offsets) o = day_rng.uniform(-shape.day_temp_spread, shape.day_temp_spread);
    const auto t_min_of = [&](long d) { return shape.t_out_min + offsets[static_cast<std::size_t>(d + 1)]; };
    const auto t_max_of = [&](long d) { return shape.t_out_max + offsets[static_cast<std::size_t>(d + 1)]; };

    CounterRng noise_rng(seed, stream_id("weather-noise"));
    OuProcess temp_noise(3600.0, shape.t_out_noise, step_s, noise_rng);
    OuProcess cloud(3600.0, 1.0, step_s, noise_rng);

    const double rise = shape.t_out_max_hour - shape.t_out_min_hour;
    const double fall = 24.0 - rise;
    const double daylight = shape.sunset_hour - shape.sunrise_hour;

    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * step_s;
        const long day = static_cast<long>(std::floor(t / kDay));
        const double h = (t - static_cast<double>(day) * kDay) / 3600.0;

        double base;
        if (h < shape.t_out_min_hour) {
            // falling from yesterday's maximum
            const double since = h + 24.0 - shape.t_out_max_hour;
            base = cosine_blend(t_max_of(day - 1), t_min_of(day), since / fall);
        } else if (h < shape.t_out_max_hour) {
            base = cosine_blend(t_min_of(day), t_max_of(day), (h - shape.t_out_min_hour) / rise);
        } else {
            base = cosine_blend(t_max_of(day), t_min_of(day + 1), (h - shape.t_out_max_hour) / fall);
        }
        tr.t_out[i] = base + temp_noise.value();
        temp_noise.advance(noise_rng);

        double irr = 0.0;
        if (h > shape.sunrise_hour && h < shape.sunset_hour) {
            const double dimming = shape.cloud_depth * 0.5 * (1.0 + std::tanh(cloud.value()));
            irr = shape.solar_peak * std::sin(std::numbers::pi * (h - shape.sunrise_hour) / daylight) * (1.0 - dimming);
        }
        tr.solar[i] = std::max(0.0, irr);
        cloud.advance(noise_rng);
    }
    return tr;
}

PeakRatios peak_ratios(const TraceSet& traces, std::span<const double> acl_free_kw) {
    PeakRatios r;
    std::size_t at = 0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const double acl = acl_free_kw.empty() ? 0.0 : acl_free_kw[i];
        const double total = traces.p_load[i] + acl;
        if (total > r.system_peak_kw) {
            r.system_peak_kw = total;
            at = i;
        }
    }
    if (r.system_peak_kw > 0.0) {
        r.acl_share = acl_free_kw.empty() ? 0.0 : acl_free_kw[at] / r.system_peak_kw;
        double wind = traces.wind_capacity_kw;
        if (!(wind > 0.0)) {
            for (double w : traces.p_wind) wind = std::max(wind, w);
        }
        r.wind_ratio = wind / r.system_peak_kw;
    }
    return r;
}

void synthesize_load_and_wind(TraceSet& traces, const TraceShape& shape, const TraceScaling& scaling,
                              std::uint64_t seed, std::span<const double> acl_free_kw) {
    validate(shape);
    const std::size_t n = traces.size();
    if (!acl_free_kw.empty() && acl_free_kw.size() != n) {
        throw ParameterDomainError("synthesize_load_and_wind: free ACL series length differs from the traces");
    }

    CounterRng load_rng(seed, stream_id("load"));
    OuProcess load_noise(1800.0, shape.load_noise, traces.step_s, load_rng);
    std::vector<double> shape_series(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = std::fmod(static_cast<double>(i) * traces.step_s, kDay) / 3600.0;
        shape_series[i] = load_profile(h) * (1.0 + load_noise.value());
        load_noise.advance(load_rng);
    }

    double acl_peak = 0.0;
    for (double v : acl_free_kw) acl_peak = std::max(acl_peak, v);

    double scale = shape.load_peak_kw;
    if (acl_peak > 0.0) {
        // share at the system peak falls as the load grows; bisect on the load scale
        const auto share_for = [&](double s) {
            double best = -1.0, share = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double total = s * shape_series[i] + acl_free_kw[i];
                if (total > best) {
                    best = total;
                    share = acl_free_kw[i] / total;
                }
            }
            return share;
        };
        double lo = 1e-6 * acl_peak, hi = 1e3 * acl_peak;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (share_for(mid) > scaling.acl_peak_share) lo = mid;
            else hi = mid;
        }
        scale = 0.5 * (lo + hi);
    }
    for (std::size_t i = 0; i < n; ++i) traces.p_load[i] = quantize_power(scale * shape_series[i]);

    double system_peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double acl = acl_free_kw.empty() ? 0.0 : acl_free_kw[i];
        system_peak = std::max(system_peak, traces.p_load[i] + acl);
    }
    const double capacity = scaling.wind_capacity_ratio * system_peak;
    traces.wind_capacity_kw = capacity;

    CounterRng wind_rng(seed, stream_id("wind"));
    OuProcess slow(shape.wind_slow_tau_s, shape.wind_slow_std, traces.step_s, wind_rng);
    OuProcess fast(shape.wind_fast_tau_s, shape.wind_fast_std, traces.step_s, wind_rng);
    const double lag = shape.wind_smoothing_tau_s > 0.0 ? 1.0 - std::exp(-traces.step_s / shape.wind_smoothing_tau_s) : 1.0;
    double smoothed = shape.wind_mean + slow.value() + fast.value();
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) smoothed += lag * (shape.wind_mean + slow.value() + fast.value() - smoothed);
        traces.p_wind[i] = quantize_power(capacity * std::clamp(smoothed, 0.0, 1.0));
        slow.advance(wind_rng);
        fast.advance(wind_rng);
    }
}

TraceSet generate_traces(const TraceShape& shape, const TraceScaling& scaling, double step_s, std::size_t days,
                         std::uint64_t seed, std::span<const double> acl_free_kw) {
    TraceSet tr = generate_weather(shape, step_s, days, seed);
    synthesize_load_and_wind(tr, shape, scaling, seed, acl_free_kw);
    return tr;
}

void write_traces(std::ostream& os, const TraceSet& traces) {
    os << "time_s,t_out_c,solar_wm2,p_load_kw,p_wind_kw\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
        os << fmt::format("{},{},{},{},{}\n", static_cast<double>(i) * traces.step_s, traces.t_out[i],
                          traces.solar[i], traces.p_load[i], traces.p_wind[i]);
    }
}

TraceSet read_traces(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("traces: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time_s,t_out_c,solar_wm2,p_load_kw,p_wind_kw") {
        throw FormatError("traces: unexpected header '" + line + "'");
    }
    TraceSet tr;
    std::vector<double> times;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        std::string cell;
        double v[5];
        int col = 0;
        while (col < 5 && std::getline(row, cell, ',')) {
            try {
                v[col++] = std::stod(cell);
            } catch (const std::exception&) {
                throw FormatError(fmt::format("traces: bad number on line {}", line_no));
            }
        }
        if (col != 5) throw FormatError(fmt::format("traces: expected 5 columns on line {}", line_no));
        times.push_back(v[0]);
        tr.t_out.push_back(v[1]);
        tr.solar.push_back(v[2]);
        tr.p_load.push_back(quantize_power(v[3]));
        tr.p_wind.push_back(quantize_power(v[4]));
    }
    if (times.size() < 2) throw FormatError("traces: need at least two samples");
    tr.step_s = times[1] - times[0];
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double expected = times[0] + static_cast<double>(i) * tr.step_s;
        if (std::abs(times[i] - expected) > 1e-6 * std::max(1.0, expected)) {
            throw FormatError(fmt::format("traces: non-uniform time grid at sample {}", i));
        }
    }
    validate(tr);
    return tr;
}

} // namespace tieline
