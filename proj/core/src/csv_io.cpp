#include "tieline/csv_io.hpp"

#include "tieline/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tieline {

namespace fs = std::filesystem;

namespace {

std::vector<double> split_numbers(const std::string& line, std::size_t line_no, const char* what) {
    std::vector<double> v;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
        try {
            v.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw FormatError(fmt::format("{}: bad number '{}' on line {}", what, cell, line_no));
        }
    }
    return v;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + p.string());
    return is;
}

} // namespace

void write_results(std::ostream& os, std::span<const RecordRow> rows) {
    os << kResultsHeader << '\n';
    for (const RecordRow& r : rows) {
        os << fmt::format("{},{},{},{},{},{},{},{}\n", r.time_s, r.p_g, r.p_g0_reference, r.p_g_lpf, r.p_ac_actual,
                          r.p_ac_target, r.s_aggregate, r.n_on);
    }
}

std::vector<RecordRow> read_results(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("results: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsHeader) throw FormatError("results: unexpected header '" + line + "'");
    std::vector<RecordRow> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<double> v = split_numbers(line, line_no, "results");
        if (v.size() != 8) throw FormatError(fmt::format("results: expected 8 columns on line {}", line_no));
        rows.push_back(RecordRow{v[0], v[1], v[2], v[3], v[4], v[5], v[6], static_cast<std::size_t>(v[7])});
    }
    return rows;
}

void write_run_directory(const fs::path& dir, const RunResult& run) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    {
        auto os = open_out(dir / RunFiles::results);
        write_results(os, run.rows);
    }
    {
        auto os = open_out(dir / RunFiles::cycles);
        write_cycle_records(os, run.cycles);
    }
    auto os = open_out(dir / RunFiles::summary);
    os << fmt::format("mode = {}\n", run.mode == ControlMode::controlled ? "controlled" : "uncontrolled");
    os << fmt::format("warmup_s = {}\n", run.warmup);
    os << fmt::format("control_cycle_s = {}\n", run.control_cycle);
    os << fmt::format("record_cycle_s = {}\n", run.record_cycle);
    os << fmt::format("bid_lead_s = {}\n", run.cycle_start_s.empty() ? 0.0 : run.cycle_start_s[0] - run.bid_time_s[0]);
    os << fmt::format("cycles = {}\n", run.cycles.size());
    os << fmt::format("broadcasts = {}\n", run.broadcasts);
    os << fmt::format("comfort_violation_acl_minutes = {}\n", run.comfort_violation_acl_minutes);
    os << fmt::format("total_acl_minutes = {}\n", run.total_acl_minutes);
    os << fmt::format("disaggregation_checks = {}\n", run.disaggregation_checks);
    os << fmt::format("disaggregation_mismatches = {}\n", run.disaggregation_mismatches);
    os << fmt::format("max_net_load_error_kw = {}\n", run.max_net_load_error);
    if (!os) throw std::runtime_error("cannot write " + (dir / RunFiles::summary).string());
}

RunResult read_run_directory(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("not a run directory: " + dir.string());
    RunResult run;
    double bid_lead = 0.0;
    {
        auto is = open_in(dir / RunFiles::summary);
        std::map<std::string, std::string> kv;
        std::string line;
        while (std::getline(is, line)) {
            const auto eq = line.find(" = ");
            if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
        }
        const auto num = [&](const char* key) {
            const auto it = kv.find(key);
            if (it == kv.end()) throw FormatError(fmt::format("run summary: missing '{}'", key));
            return std::stod(it->second);
        };
        run.mode = kv["mode"] == "uncontrolled" ? ControlMode::uncontrolled : ControlMode::controlled;
        run.warmup = num("warmup_s");
        run.control_cycle = num("control_cycle_s");
        run.record_cycle = num("record_cycle_s");
        run.broadcasts = static_cast<std::size_t>(num("broadcasts"));
        run.comfort_violation_acl_minutes = num("comfort_violation_acl_minutes");
        run.total_acl_minutes = num("total_acl_minutes");
        run.disaggregation_checks = static_cast<std::size_t>(num("disaggregation_checks"));
        run.disaggregation_mismatches = static_cast<std::size_t>(num("disaggregation_mismatches"));
        run.max_net_load_error = num("max_net_load_error_kw");
        bid_lead = num("bid_lead_s");
    }
    {
        auto is = open_in(dir / RunFiles::results);
        run.rows = read_results(is);
    }
    {
        auto is = open_in(dir / RunFiles::cycles);
        run.cycles = read_cycle_records(is);
    }
    for (const CycleRecord& c : run.cycles) {
        run.cycle_start_s.push_back(-run.warmup + static_cast<double>(c.k + 1) * run.control_cycle);
        run.bid_time_s.push_back(run.cycle_start_s.back() - bid_lead);
    }
    return run;
}

} // namespace tieline
