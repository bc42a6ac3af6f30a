#include "tieline/metrics.hpp"

#include "tieline/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

namespace tieline {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double rmse(std::span<const RecordRow> rows, double RecordRow::*actual, double RecordRow::*target,
            std::size_t* used = nullptr) {
    double ss = 0.0;
    std::size_t n = 0;
    for (const RecordRow& r : rows) {
        if (r.time_s < 0.0 || !std::isfinite(r.*target)) continue;
        const double e = r.*actual - r.*target;
        ss += e * e;
        ++n;
    }
    if (used) *used = n;
    return n == 0 ? 0.0 : std::sqrt(ss / static_cast<double>(n));
}

} // namespace

double fluctuation_rate_at(std::span<const double> p_g, std::size_t index, std::size_t window) {
    if (window == 0 || index >= p_g.size() || index + 1 < window) {
        throw MetricsError(fmt::format("fluctuation window of {} samples ending at {} is not covered", window, index));
    }
    const auto first = p_g.begin() + static_cast<std::ptrdiff_t>(index + 1 - window);
    const auto last = p_g.begin() + static_cast<std::ptrdiff_t>(index + 1);
    const auto [lo, hi] = std::minmax_element(first, last);
    return *hi - *lo;
}

std::size_t fluctuation_window(double record_cycle_s) {
    return static_cast<std::size_t>(std::llround(600.0 / record_cycle_s));
}

double fluctuation_rate(std::span<const double> p_g, double t_min, double record_cycle_s) {
    const double idx = t_min * 60.0 / record_cycle_s;
    if (idx < 0.0) throw MetricsError("fluctuation_rate: negative time");
    return fluctuation_rate_at(p_g, static_cast<std::size_t>(std::llround(idx)), fluctuation_window(record_cycle_s));
}

std::vector<double> fluctuation_series(std::span<const double> p_g, std::size_t window) {
    std::vector<double> out;
    if (window == 0 || p_g.size() < window) return out;
    out.reserve(p_g.size() - window + 1);
    std::deque<std::size_t> maxq, minq;
    for (std::size_t i = 0; i < p_g.size(); ++i) {
        while (!maxq.empty() && p_g[maxq.back()] <= p_g[i]) maxq.pop_back();
        while (!minq.empty() && p_g[minq.back()] >= p_g[i]) minq.pop_back();
        maxq.push_back(i);
        minq.push_back(i);
        if (maxq.front() + window <= i) maxq.pop_front();
        if (minq.front() + window <= i) minq.pop_front();
        if (i + 1 >= window) out.push_back(p_g[maxq.front()] - p_g[minq.front()]);
    }
    return out;
}

SummaryStats summarize(std::span<const double> values) {
    SummaryStats s;
    if (values.empty()) return s;
    s.min = values.front();
    s.max = values.front();
    double sum = 0.0, sum_abs = 0.0;
    std::size_t within = 0;
    for (double v : values) {
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        s.max_abs = std::max(s.max_abs, std::abs(v));
        sum += v;
        sum_abs += std::abs(v);
        if (std::abs(v) <= 0.9) ++within;
    }
    const auto n = static_cast<double>(values.size());
    s.mean = sum / n;
    s.mean_abs = sum_abs / n;
    s.fraction_abs_le_0_9 = static_cast<double>(within) / n;
    return s;
}

std::vector<double> s_trajectory(const RunResult& run) {
    std::vector<double> s;
    if (!run.cycles.empty()) {
        for (std::size_t k = 0; k < run.cycles.size(); ++k) {
            const CycleRecord& c = run.cycles[k];
            const double start = k < run.cycle_start_s.size() ? run.cycle_start_s[k] : 0.0;
            if (c.skipped || start <= 0.0) continue;
            s.push_back(c.s_aggregate);
        }
        return s;
    }
    for (const RecordRow& r : run.rows) {
        if (r.time_s >= 0.0) s.push_back(r.s_aggregate);
    }
    return s;
}

MetricsReport compute_metrics(const RunResult& controlled, const RunResult& uncontrolled) {
    if (controlled.rows.size() != uncontrolled.rows.size()) {
        throw MetricsError(fmt::format("runs differ in length: {} vs {} rows", controlled.rows.size(),
                                       uncontrolled.rows.size()));
    }
    if (controlled.record_cycle != uncontrolled.record_cycle) {
        throw MetricsError("runs differ in record cycle");
    }
    for (std::size_t i = 0; i < controlled.rows.size(); ++i) {
        if (controlled.rows[i].time_s != uncontrolled.rows[i].time_s) {
            throw MetricsError(fmt::format("runs differ in time grid at row {}", i));
        }
    }

    const std::size_t window = fluctuation_window(controlled.record_cycle);
    std::vector<double> pc, pu;
    pc.reserve(controlled.rows.size());
    pu.reserve(uncontrolled.rows.size());
    for (const RecordRow& r : controlled.rows) pc.push_back(r.p_g);
    for (const RecordRow& r : uncontrolled.rows) pu.push_back(r.p_g);
    const std::vector<double> fc = fluctuation_series(pc, window);
    const std::vector<double> fu = fluctuation_series(pu, window);

    MetricsReport m;
    std::size_t not_worse = 0;
    for (std::size_t i = 0; i < controlled.rows.size(); ++i) {
        const double t = controlled.rows[i].time_s;
        if (t < 0.0 || i + 1 < window) continue;
        const std::size_t w = i + 1 - window;
        m.time_s.push_back(t);
        m.fluctuation_controlled.push_back(fc[w]);
        m.fluctuation_uncontrolled.push_back(fu[w]);
        if (fc[w] <= fu[w]) ++not_worse;
    }
    if (m.time_s.empty()) throw MetricsError("no metric instants after warm-up with a full 10-minute window");

    m.max_fluctuation_controlled = *std::max_element(m.fluctuation_controlled.begin(), m.fluctuation_controlled.end());
    m.max_fluctuation_uncontrolled =
        *std::max_element(m.fluctuation_uncontrolled.begin(), m.fluctuation_uncontrolled.end());
    m.median_fluctuation_controlled = median(m.fluctuation_controlled);
    m.median_fluctuation_uncontrolled = median(m.fluctuation_uncontrolled);
    m.max_fluctuation_reduction =
        m.max_fluctuation_uncontrolled > 0.0 ? 1.0 - m.max_fluctuation_controlled / m.max_fluctuation_uncontrolled : 0.0;
    m.median_fluctuation_reduction = m.median_fluctuation_uncontrolled > 0.0
                                         ? 1.0 - m.median_fluctuation_controlled / m.median_fluctuation_uncontrolled
                                         : 0.0;
    m.fraction_controlled_not_worse = static_cast<double>(not_worse) / static_cast<double>(m.time_s.size());

    m.tie_line_rmse_controlled = rmse(controlled.rows, &RecordRow::p_g, &RecordRow::p_g_lpf);
    m.tie_line_rmse_uncontrolled = rmse(uncontrolled.rows, &RecordRow::p_g, &RecordRow::p_g_lpf);
    std::size_t targets = 0;
    const double acl = rmse(controlled.rows, &RecordRow::p_ac_actual, &RecordRow::p_ac_target, &targets);
    if (targets > 0) m.acl_tracking_rmse = acl;

    m.comfort_violation_acl_minutes_controlled = controlled.comfort_violation_acl_minutes;
    m.comfort_violation_acl_minutes_uncontrolled = uncontrolled.comfort_violation_acl_minutes;
    m.comfort_violation_fraction_controlled = controlled.total_acl_minutes > 0.0
                                                  ? controlled.comfort_violation_acl_minutes / controlled.total_acl_minutes
                                                  : 0.0;
    m.s_controlled = summarize(s_trajectory(controlled));
    m.s_uncontrolled = summarize(s_trajectory(uncontrolled));
    return m;
}

void write_metrics_report(std::ostream& os, const MetricsReport& m) {
    const auto line = [&](const char* key, double v) { os << fmt::format("{} = {}\n", key, v); };
    os << "# tie-line smoothing metrics\n";
    line("instants", static_cast<double>(m.time_s.size()));
    line("max_fluctuation_controlled_kw", m.max_fluctuation_controlled);
    line("max_fluctuation_uncontrolled_kw", m.max_fluctuation_uncontrolled);
    line("median_fluctuation_controlled_kw", m.median_fluctuation_controlled);
    line("median_fluctuation_uncontrolled_kw", m.median_fluctuation_uncontrolled);
    line("max_fluctuation_reduction", m.max_fluctuation_reduction);
    line("median_fluctuation_reduction", m.median_fluctuation_reduction);
    line("fraction_controlled_not_worse", m.fraction_controlled_not_worse);
    line("tie_line_rmse_controlled_kw", m.tie_line_rmse_controlled);
    line("tie_line_rmse_uncontrolled_kw", m.tie_line_rmse_uncontrolled);
    if (m.acl_tracking_rmse) line("acl_tracking_rmse_kw", *m.acl_tracking_rmse);
    else os << "acl_tracking_rmse_kw = n/a\n";
    line("comfort_violation_acl_minutes_controlled", m.comfort_violation_acl_minutes_controlled);
    line("comfort_violation_acl_minutes_uncontrolled", m.comfort_violation_acl_minutes_uncontrolled);
    line("comfort_violation_fraction_controlled", m.comfort_violation_fraction_controlled);
    const auto stats = [&](const char* prefix, const SummaryStats& s) {
        os << fmt::format("{}_min = {}\n{}_max = {}\n{}_mean = {}\n{}_mean_abs = {}\n{}_max_abs = {}\n"
                          "{}_fraction_abs_le_0_9 = {}\n",
                          prefix, s.min, prefix, s.max, prefix, s.mean, prefix, s.mean_abs, prefix, s.max_abs, prefix,
                          s.fraction_abs_le_0_9);
    };
    stats("s_controlled", m.s_controlled);
    stats("s_uncontrolled", m.s_uncontrolled);
}

} // namespace tieline
