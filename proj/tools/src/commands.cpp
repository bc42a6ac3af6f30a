#include "commands.hpp"

#include "manifest.hpp"

#include <tieline/csv_io.hpp>
#include <tieline/errors.hpp>
#include <tieline/metrics.hpp>
#include <tieline/rng.hpp>
#include <tieline/scenario_io.hpp>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace tieline::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kScenarioFile = "scenario.yaml";
constexpr const char* kModelFile = "baseline_model.txt";

/// An error that maps onto a process exit code.
class CommandError : public std::runtime_error {
public:
    CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

std::ifstream open_in(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw CommandError(kIoError, "cannot read " + p.string());
    return is;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw CommandError(kIoError, "cannot write " + p.string());
    return os;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw CommandError(kIoError, "cannot create directory " + dir.string());
}

void close_checked(std::ofstream& os, const fs::path& p) {
    os.close();
    if (!os) throw CommandError(kIoError, "cannot write " + p.string());
}

Scenario load_scenario(const fs::path& path) {
    auto is = open_in(path);
    try {
        Scenario s = read_scenario(is);
        validate(s);
        return s;
    } catch (const FormatError& e) {
        throw CommandError(kIoError, e.what());
    }
}

TraceSet load_traces(const fs::path& path) {
    auto is = open_in(path);
    try {
        return read_traces(is);
    } catch (const FormatError& e) {
        throw CommandError(kIoError, e.what());
    }
}

BaselineModel load_model(const fs::path& path) {
    auto is = open_in(path);
    try {
        return read_baseline_model(is);
    } catch (const FormatError& e) {
        throw CommandError(kIoError, e.what());
    }
}

fs::path relative_to(const fs::path& scenario, const std::string& file) {
    const fs::path p(file);
    return p.is_absolute() ? p : scenario.parent_path() / p;
}

template <class Fn>
int guarded(const char* command, Fn&& fn) {
    try {
        return fn();
    } catch (const CommandError& e) {
        std::cerr << command << ": " << e.what() << '\n';
        return e.code();
    } catch (const FitError& e) {
        std::cerr << command << ": " << e.what() << '\n';
        for (const std::string& c : e.degenerate_columns()) std::cerr << "  degenerate column: " << c << '\n';
        return kFitFailure;
    } catch (const NumericAbort& e) {
        std::cerr << command << ": numeric abort at control cycle " << e.cycle() << ": " << e.what() << '\n';
        return kNumericAbort;
    } catch (const MetricsError& e) {
        std::cerr << command << ": " << e.what() << '\n';
        return kIncomparable;
    } catch (const FormatError& e) {
        std::cerr << command << ": " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument& e) {
        std::cerr << command << ": invalid configuration: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << command << ": " << e.what() << '\n';
        return kIoError;
    }
}

std::uint64_t derived_seed(std::uint64_t seed, const char* purpose) {
    return CounterRng(seed, stream_id(purpose)).next_u64();
}

double total_rated(const std::vector<House>& houses) {
    double r = 0.0;
    for (const House& h : houses) r += h.agent.rated_power;
    return r;
}

void write_long_csv(const fs::path& file, const char* value_column,
                    std::initializer_list<std::pair<const char*, const std::vector<std::pair<double, double>>*>> series) {
    auto os = open_out(file);
    os << "time_s,series," << value_column << '\n';
    for (const auto& [name, points] : series) {
        for (const auto& [t, v] : *points) os << fmt::format("{},{},{}\n", t, name, v);
    }
    close_checked(os, file);
}

} // namespace

int cmd_gen_scenario(const GenScenarioOptions& o) {
    return guarded("gen-scenario", [&] {
        const fs::path dir(o.out_dir);
        ensure_directory(dir);

        Scenario s;
        s.config.seed = o.seed;
        s.days = o.days;
        s.config.duration = static_cast<double>(o.days) * 86400.0;
        if (o.n_acl) s.config.n_acl = *o.n_acl;
        s.population.n = s.config.n_acl;
        validate(s);

        // the load is scaled against the free-running population on the same weather
        const std::vector<House> houses = generate_population(s.population, s.config.seed);
        TraceSet traces = generate_weather(s.trace_shape, s.config.record_cycle, s.days, s.config.seed);
        const RunResult free_run = run_uncontrolled(s.config, houses, traces);
        const std::vector<double> free_kw = free_acl_power(free_run);
        const TraceScaling scaling{s.config.wind_capacity_ratio, s.config.acl_peak_share};
        synthesize_load_and_wind(traces, s.trace_shape, scaling, s.config.seed, free_kw);

        const TraceSet training = generate_traces(s.trace_shape, scaling, s.config.record_cycle, s.training_days,
                                                  derived_seed(s.config.seed, "training-traces"), {});

        fs::path p = dir / kScenarioFile;
        auto os = open_out(p);
        write_scenario(os, s);
        close_checked(os, p);
        p = dir / s.traces_file;
        os = open_out(p);
        write_traces(os, traces);
        close_checked(os, p);
        p = dir / s.training_traces_file;
        os = open_out(p);
        write_traces(os, training);
        close_checked(os, p);

        const PeakRatios r = peak_ratios(traces, free_kw);
        std::cout << fmt::format("wrote {} ({} ACLs, {} day(s))\n", (dir / kScenarioFile).string(), s.config.n_acl,
                                 s.days);
        std::cout << fmt::format("system peak {:.1f} kW, ACL share at peak {:.3f}, wind capacity ratio {:.3f}\n",
                                 r.system_peak_kw, r.acl_share, r.wind_ratio);
        return kOk;
    });
}

int cmd_train(const TrainOptions& o) {
    return guarded("train", [&] {
        const fs::path scenario_path(o.scenario);
        Scenario s = load_scenario(scenario_path);
        if (o.seed) s.config.seed = *o.seed;
        const TraceSet training = load_traces(relative_to(scenario_path, s.training_traces_file));

        const std::vector<House> houses = generate_population(s.population, s.config.seed);
        const std::vector<TrainingDay> days = split_training_days(training, s.training_enrollment);
        const std::vector<TrainingSample> samples = run_training_simulation(s.config, houses, days);
        const BaselineModel model = fit_baseline_model(samples);

        const fs::path out = o.out.empty() ? scenario_path.parent_path() / kModelFile : fs::path(o.out);
        auto os = open_out(out);
        write_baseline_model(os, model);
        close_checked(os, out);

        double peak = 0.0;
        for (const TrainingSample& t : samples) peak = std::max(peak, t.p_ac_free);
        const double rmse = in_sample_rmse(model, samples);
        std::cout << fmt::format("trained on {} samples over {} day(s); in-sample RMSE {:.3f} kW ({:.2f}% of free peak)\n",
                                 samples.size(), days.size(), rmse, peak > 0.0 ? 100.0 * rmse / peak : 0.0);
        std::cout << fmt::format("wrote {}\n", out.string());
        return kOk;
    });
}

int cmd_run(const RunOptionsCli& o) {
    return guarded("run", [&] {
        RunManifest manifest;
        manifest.command = o.uncontrolled ? "run --uncontrolled" : "run";
        manifest.started_utc = utc_now();

        const fs::path scenario_path(o.scenario);
        Scenario s = load_scenario(scenario_path);
        if (o.seed) s.config.seed = *o.seed;
        if (o.baseline_bias) s.config.baseline_bias = *o.baseline_bias;
        if (o.workers) s.config.workers = *o.workers;
        if (o.no_soa_feedback) s.config.soa_feedback_enabled = false;
        validate(s.config);

        const fs::path traces_path = relative_to(scenario_path, s.traces_file);
        const TraceSet traces = load_traces(traces_path);
        manifest.inputs.push_back({"scenario", scenario_path, git_blob_hash_file(scenario_path)});
        manifest.inputs.push_back({"traces", traces_path, git_blob_hash_file(traces_path)});

        const std::vector<House> houses = generate_population(s.population, s.config.seed);
        RunResult result;
        if (o.uncontrolled) {
            result = run_uncontrolled(s.config, houses, traces);
        } else {
            const fs::path model_path(o.model);
            const BaselineModel model = load_model(model_path);
            manifest.inputs.push_back({"model", model_path, git_blob_hash_file(model_path)});
            RunOptions ro;
            ro.keep_bid_batches = o.audit_bids;
            result = run_scenario(s.config, houses, traces, model, mgcc_config_for(s.config, s.mgcc), ro);
        }
        // flags change the outcome, so they take part in the input hash
        manifest.inputs.push_back({"options", fs::path(),
                                   git_blob_hash(fmt::format("seed={} bias={} feedback={} uncontrolled={}\n",
                                                             s.config.seed, s.config.baseline_bias,
                                                             s.config.soa_feedback_enabled, o.uncontrolled))});

        const fs::path dir(o.out_dir);
        ensure_directory(dir);
        try {
            write_run_directory(dir, result);
        } catch (const std::runtime_error& e) {
            throw CommandError(kIoError, e.what());
        }
        std::vector<std::string> outputs{RunFiles::results, RunFiles::cycles, RunFiles::summary};
        if (o.audit_bids) {
            const fs::path p = dir / "bids.csv";
            auto os = open_out(p);
            for (const BidBatchAudit& a : result.audits) {
                os << fmt::format("# cycle {} bid_time_s {} broadcast_time_s {}\n", a.k, a.bid_time_s,
                                  a.broadcast_time_s);
                write_bid_batch(os, a.bids);
                write_clearing_outcome(os, a.outcome);
            }
            close_checked(os, p);
            outputs.emplace_back("bids.csv");
        }
        for (const std::string& f : outputs) manifest.outputs.push_back({f, dir / f, git_blob_hash_file(dir / f)});

        manifest.scenario = scenario_path;
        manifest.seed = s.config.seed;
        manifest.output_dir = dir;
        manifest.input_hash = combined_hash(manifest.inputs);
        manifest.finished_utc = utc_now();
        write_manifest(dir / RunFiles::manifest, manifest);

        std::cout << fmt::format("{} run: {} rows, {} control cycles, {} broadcasts; wrote {}\n",
                                 o.uncontrolled ? "uncontrolled" : "controlled", result.rows.size(),
                                 result.cycles.size(), result.broadcasts, dir.string());
        std::cout << fmt::format("total rated ACL power {:.1f} kW\n", total_rated(houses));
        return kOk;
    });
}

int cmd_metrics(const MetricsOptions& o) {
    return guarded("metrics", [&] {
        const fs::path cdir(o.controlled_dir), udir(o.uncontrolled_dir);
        for (const fs::path& d : {cdir, udir}) {
            if (!fs::is_directory(d)) throw CommandError(kIoError, "no such run directory: " + d.string());
        }
        const std::string ch = manifest_input_hash(cdir / RunFiles::manifest, "traces");
        const std::string uh = manifest_input_hash(udir / RunFiles::manifest, "traces");
        if (ch != uh) {
            throw CommandError(kIncomparable, fmt::format("runs used different traces ({} vs {})", ch, uh));
        }

        RunResult controlled, uncontrolled;
        try {
            controlled = read_run_directory(cdir);
            uncontrolled = read_run_directory(udir);
        } catch (const std::runtime_error& e) {
            throw CommandError(kIoError, e.what());
        }
        const MetricsReport m = compute_metrics(controlled, uncontrolled);

        const fs::path out(o.out_dir);
        ensure_directory(out);
        fs::path p = out / "metrics_report.txt";
        auto os = open_out(p);
        write_metrics_report(os, m);
        close_checked(os, p);

        using Series = std::vector<std::pair<double, double>>;
        Series pg_c, pg_u, lpf_c, s_c, s_u;
        for (std::size_t i = 0; i < controlled.rows.size(); ++i) {
            const RecordRow& c = controlled.rows[i];
            const RecordRow& u = uncontrolled.rows[i];
            if (c.time_s < 0.0) continue;
            pg_c.emplace_back(c.time_s, c.p_g);
            pg_u.emplace_back(u.time_s, u.p_g);
            lpf_c.emplace_back(c.time_s, c.p_g_lpf);
            s_c.emplace_back(c.time_s, c.s_aggregate);
            s_u.emplace_back(u.time_s, u.s_aggregate);
        }
        Series fl_c, fl_u;
        for (std::size_t i = 0; i < m.time_s.size(); ++i) {
            fl_c.emplace_back(m.time_s[i], m.fluctuation_controlled[i]);
            fl_u.emplace_back(m.time_s[i], m.fluctuation_uncontrolled[i]);
        }
        write_long_csv(out / "smoothing.csv", "p_kw",
                       {{"controlled", &pg_c}, {"uncontrolled", &pg_u}, {"lpf_target", &lpf_c}});
        write_long_csv(out / "fluctuation_rate.csv", "fluctuation_kw", {{"controlled", &fl_c}, {"uncontrolled", &fl_u}});
        write_long_csv(out / "s_trajectory.csv", "s", {{"controlled", &s_c}, {"uncontrolled", &s_u}});

        std::cout << fmt::format("max 10-min fluctuation {:.2f} kW controlled vs {:.2f} kW uncontrolled ({:.1f}% lower)\n",
                                 m.max_fluctuation_controlled, m.max_fluctuation_uncontrolled,
                                 100.0 * m.max_fluctuation_reduction);
        std::cout << fmt::format("controlled not worse at {:.1f}% of {} instants; wrote {}\n",
                                 100.0 * m.fraction_controlled_not_worse, m.time_s.size(), out.string());
        return kOk;
    });
}

} // namespace tieline::cli
