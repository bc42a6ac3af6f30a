#include "tieline/simulation.hpp"

#include "tieline/agent.hpp"
#include "tieline/errors.hpp"
#include "tieline/rng.hpp"
#include "tieline/thermal.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

namespace tieline {

namespace {

bool is_multiple(double value, double unit) {
    const double q = value / unit;
    return std::abs(q - std::round(q)) < 1e-9;
}

std::size_t ratio(double value, double unit) {
    return static_cast<std::size_t>(std::llround(value / unit));
}

struct HouseRuntime {
    ThermalState thermal;
    AclAgentState agent;
};

// Per-block scratch written by the house kernels; one slot per house so
// workers never share a cache line of mutable state with reductions.
struct BlockScratch {
    std::size_t steps = 0;
    std::size_t records = 0;
    std::vector<std::uint8_t> on;      // house-major, steps per house
    std::vector<double> soa;           // house-major, records per house
    std::vector<std::uint8_t> outside; // house-major, records per house
    std::vector<Bid> bids;
    std::vector<std::uint8_t> non_finite;

    void resize(std::size_t houses, std::size_t steps_per_block, std::size_t records_per_block) {
        steps = steps_per_block;
        records = records_per_block;
        on.assign(houses * steps, 0);
        soa.assign(houses * records, 0.0);
        outside.assign(houses * records, 0);
        bids.assign(houses, Bid{});
        non_finite.assign(houses, 0);
    }
};

struct BlockTiming {
    double start_s = 0.0;
    double step_s = 5.0;
    std::size_t record_every = 2;
    std::size_t bid_step = 11;
};

class Engine {
public:
    Engine(const ScenarioConfig& cfg, std::span<const House> houses, const TraceSet& traces)
        : cfg_(cfg), houses_(houses), traces_(traces) {
        validate(cfg);
        validate(traces);
        if (traces.duration_s() + 1e-9 < cfg.duration) {
            throw ParameterDomainError(fmt::format("traces cover {} s but the run needs {} s", traces.duration_s(),
                                                   cfg.duration));
        }
        steppers_.reserve(houses.size());
        runtime_.reserve(houses.size());
        for (std::size_t i = 0; i < houses.size(); ++i) {
            const House& h = houses[i];
            steppers_.emplace_back(h.etp, cfg.sim_step);
            // initial temperatures inside the deadband, compressor state random
            CounterRng rng(cfg.seed, stream_id("initial-state"), i);
            const double half = 0.5 * h.agent.deadband;
            const double t0 = rng.uniform(h.agent.t_set - half, h.agent.t_set + half);
            const bool on = rng.uniform01() < 0.5;
            runtime_.push_back(HouseRuntime{ThermalState{t0, t0}, initial_agent_state(h.agent, on)});
        }
        timing_.step_s = cfg.sim_step;
        timing_.record_every = ratio(cfg.record_cycle, cfg.sim_step);
        timing_.bid_step = ratio(cfg.control_cycle - cfg.bid_lead, cfg.sim_step);
        scratch_.resize(houses.size(), ratio(cfg.control_cycle, cfg.sim_step),
                        ratio(cfg.control_cycle, cfg.record_cycle));
    }

    std::size_t block_count() const { return ratio(cfg_.warmup + cfg_.duration, cfg_.control_cycle); }

    double block_start(std::size_t b) const {
        return -cfg_.warmup + static_cast<double>(b) * cfg_.control_cycle;
    }

    std::size_t trace_index(double t) const { return t < 0.0 ? 0 : traces_.index_at(t); }

    // Advances every house through block b. `broadcast` is applied at the
    // block start, before the first thermostat evaluation.
    void advance_block(std::size_t b, std::optional<double> broadcast) {
        timing_.start_s = block_start(b);
        const std::size_t n = houses_.size();
        const std::size_t workers = std::max<std::size_t>(1, std::min(cfg_.workers, n));
        if (workers <= 1) {
            run_houses(0, n, broadcast);
            return;
        }
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = n * w / workers;
            const std::size_t hi = n * (w + 1) / workers;
            pool.emplace_back([this, lo, hi, broadcast] { run_houses(lo, hi, broadcast); });
        }
    }

    const BlockScratch& scratch() const { return scratch_; }
    const BlockTiming& timing() const { return timing_; }
    std::span<const House> houses() const { return houses_; }
    const TraceSet& traces() const { return traces_; }

private:
    void run_houses(std::size_t lo, std::size_t hi, std::optional<double> broadcast) {
        const std::size_t steps = scratch_.steps;
        const std::size_t records = scratch_.records;
        for (std::size_t i = lo; i < hi; ++i) {
            const AclAgentConfig& agent_cfg = houses_[i].agent;
            HouseRuntime& rt = runtime_[i];
            if (broadcast) rt.agent = apply_clearing_price(*broadcast, rt.agent, agent_cfg);
            const double lo_band = agent_cfg.t_min() - cfg_.comfort_margin;
            const double hi_band = agent_cfg.t_max() + cfg_.comfort_margin;
            for (std::size_t j = 0; j < steps; ++j) {
                const double t = timing_.start_s + static_cast<double>(j) * timing_.step_s;
                const WeatherSample w = traces_.weather(trace_index(t));
                const double t_air = rt.thermal.t_air;
                rt.agent = thermostat_step(t_air, rt.agent, agent_cfg);
                scratch_.on[i * steps + j] = rt.agent.compressor_on ? 1 : 0;
                if (j % timing_.record_every == 0) {
                    const std::size_t r = j / timing_.record_every;
                    scratch_.soa[i * records + r] = compute_soa(t_air, agent_cfg);
                    scratch_.outside[i * records + r] = (t_air < lo_band || t_air > hi_band) ? 1 : 0;
                }
                if (j == timing_.bid_step) {
                    rt.agent.soa = compute_soa(t_air, agent_cfg);
                    scratch_.bids[i] = make_bid(rt.agent, agent_cfg, static_cast<AgentId>(i));
                }
                rt.thermal = steppers_[i].step(rt.thermal, w, rt.agent.compressor_on);
            }
            scratch_.non_finite[i] = (std::isfinite(rt.thermal.t_air) && std::isfinite(rt.thermal.t_mass)) ? 0 : 1;
        }
    }

    const ScenarioConfig& cfg_;
    std::span<const House> houses_;
    const TraceSet& traces_;
    std::vector<EtpStepper> steppers_;
    std::vector<HouseRuntime> runtime_;
    BlockScratch scratch_;
    BlockTiming timing_;
};

RunResult simulate(const ScenarioConfig& cfg, std::span<const House> houses, const TraceSet& traces,
                   const BaselineModel* model, const MgccConfig* mgcc, const RunOptions& options) {
    Engine engine(cfg, houses, traces);
    const bool controlled = options.mode == ControlMode::controlled;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    RunResult res;
    res.mode = options.mode;
    res.warmup = cfg.warmup;
    res.control_cycle = cfg.control_cycle;
    res.record_cycle = cfg.record_cycle;

    const std::size_t blocks = engine.block_count();
    const BlockScratch& sc = engine.scratch();
    res.rows.reserve(blocks * sc.records);

    std::vector<double> rated(houses.size());
    for (std::size_t i = 0; i < houses.size(); ++i) rated[i] = houses[i].agent.rated_power;

    ControllerState ctrl;
    LpfState reference_lpf;
    std::optional<double> pending;
    double last_p_g0 = nan, last_lpf = nan, last_target = nan;
    std::size_t outside_count = 0;

    for (std::size_t b = 0; b < blocks; ++b) {
        engine.advance_block(b, pending);
        pending.reset();

        for (std::size_t i = 0; i < houses.size(); ++i) {
            if (sc.non_finite[i]) {
                throw NumericAbort(fmt::format("non-finite thermal state in house {} during cycle {}", i, b), b);
            }
        }

        const double start = engine.block_start(b);
        double p_g_at_bid = 0.0;
        double true_net_at_bid = 0.0;
        std::size_t bid_index = 0;
        for (std::size_t j = 0; j < sc.steps; ++j) {
            const double t = start + static_cast<double>(j) * cfg.sim_step;
            const std::size_t idx = engine.trace_index(t);
            double p_ac = 0.0;
            std::size_t n_on = 0;
            for (std::size_t i = 0; i < houses.size(); ++i) {
                if (sc.on[i * sc.steps + j]) {
                    p_ac += rated[i];
                    ++n_on;
                }
            }
            const double net = traces.p_load[idx] - traces.p_wind[idx];
            const double p_g = p_ac + net;

            if (j % engine.timing().record_every == 0) {
                const std::size_t r = j / engine.timing().record_every;
                double s_sum = 0.0;
                for (std::size_t i = 0; i < houses.size(); ++i) {
                    s_sum += sc.soa[i * sc.records + r];
                    if (t >= 0.0) outside_count += sc.outside[i * sc.records + r];
                }
                RecordRow row;
                row.time_s = t;
                row.p_g = p_g;
                row.p_ac_actual = p_ac;
                row.n_on = n_on;
                row.s_aggregate = houses.empty() ? 0.0 : s_sum / static_cast<double>(houses.size());
                if (controlled) {
                    row.p_g0_reference = last_p_g0;
                    row.p_g_lpf = last_lpf;
                    row.p_ac_target = last_target;
                } else {
                    row.p_g0_reference = p_g;
                    row.p_g_lpf = reference_lpf.initialized ? reference_lpf.p_g_lpf_prev : nan;
                    row.p_ac_target = nan;
                }
                res.rows.push_back(row);
            }
            if (j == engine.timing().bid_step) {
                p_g_at_bid = p_g;
                true_net_at_bid = net;
                bid_index = idx;
            }
        }

        const double bid_time = start + cfg.control_cycle - cfg.bid_lead;
        const double broadcast_time = start + cfg.control_cycle;
        if (controlled) {
            ControlCycleInput in;
            in.k = b;
            in.bids = std::span<const Bid>(sc.bids.data(), houses.size());
            in.p_g_measured = p_g_at_bid;
            in.weather = traces.weather(bid_index);
            in.baseline_scale = 1.0 + cfg.baseline_bias;
            const ControlCycleResult cr = run_control_cycle(in, *model, ctrl, *mgcc);
            ctrl = cr.state;
            res.cycles.push_back(cr.record);
            res.cycle_start_s.push_back(broadcast_time);
            res.bid_time_s.push_back(bid_time);
            if (!cr.record.skipped) {
                res.max_net_load_error = std::max(res.max_net_load_error, std::abs(cr.record.net_load - true_net_at_bid));
                last_p_g0 = cr.record.p_g0;
                last_lpf = cr.record.p_g_lpf;
                last_target = cr.record.p_ac_target;
                if (cr.outcome.sentinel == ClearingSentinel::normal) {
                    ++res.disaggregation_checks;
                    if (power_above_price(in.bids, cr.outcome.p_star) != cr.outcome.committed_power) {
                        ++res.disaggregation_mismatches;
                    }
                }
            }
            if (options.keep_bid_batches && !cr.record.skipped) {
                res.audits.push_back(BidBatchAudit{b, bid_time, broadcast_time,
                                                   std::vector<Bid>(in.bids.begin(), in.bids.end()), cr.outcome});
            }
            if (cr.broadcast) ++res.broadcasts;
            pending = cr.broadcast;
        } else {
            reference_lpf = lpf_step(reference_lpf, p_g_at_bid, *mgcc).state;
        }
    }

    res.comfort_violation_acl_minutes = static_cast<double>(outside_count) * cfg.record_cycle / 60.0;
    res.total_acl_minutes = static_cast<double>(houses.size()) * cfg.duration / 60.0;
    return res;
}

} // namespace

void validate(const ScenarioConfig& cfg) {
    if (!(cfg.sim_step > 0.0 && cfg.record_cycle > 0.0 && cfg.control_cycle > 0.0)) {
        throw ParameterDomainError("timing: steps and cycles must be positive");
    }
    if (!is_multiple(cfg.record_cycle, cfg.sim_step) || !is_multiple(cfg.control_cycle, cfg.record_cycle)) {
        throw ParameterDomainError("timing: sim_step must divide record_cycle, which must divide control_cycle");
    }
    if (!(cfg.bid_lead >= 0.0 && cfg.bid_lead < cfg.control_cycle) || !is_multiple(cfg.bid_lead, cfg.sim_step)) {
        throw ParameterDomainError("timing: bid_lead must be a multiple of sim_step below control_cycle");
    }
    if (!(cfg.duration > 0.0) || !is_multiple(cfg.duration, cfg.control_cycle)) {
        throw ParameterDomainError("timing: duration must be a positive multiple of control_cycle");
    }
    if (!(cfg.warmup >= 0.0) || !is_multiple(cfg.warmup, cfg.control_cycle)) {
        throw ParameterDomainError("timing: warmup must be a non-negative multiple of control_cycle");
    }
    if (cfg.n_acl < 1) throw ParameterDomainError("n_acl must be at least 1");
    if (!(cfg.baseline_bias > -1.0) || !std::isfinite(cfg.baseline_bias)) {
        throw ParameterDomainError("baseline_bias must exceed -1");
    }
    if (!(cfg.comfort_margin >= 0.0)) throw ParameterDomainError("comfort_margin must be non-negative");
}

MgccConfig mgcc_config_for(const ScenarioConfig& cfg, const MgccConfig& base) {
    MgccConfig m = base;
    m.control_cycle = cfg.control_cycle;
    m.soa_feedback_enabled = cfg.soa_feedback_enabled;
    validate(m);
    return m;
}

RunResult run_scenario(const ScenarioConfig& cfg, std::span<const House> houses, const TraceSet& traces,
                       const BaselineModel& model, const MgccConfig& mgcc, const RunOptions& options) {
    return simulate(cfg, houses, traces, &model, &mgcc, options);
}

RunResult run_uncontrolled(const ScenarioConfig& cfg, std::span<const House> houses, const TraceSet& traces) {
    MgccConfig reference;
    reference.control_cycle = cfg.control_cycle;
    RunOptions opt;
    opt.mode = ControlMode::uncontrolled;
    return simulate(cfg, houses, traces, nullptr, &reference, opt);
}

std::vector<double> free_acl_power(const RunResult& uncontrolled) {
    std::vector<double> out;
    for (const RecordRow& r : uncontrolled.rows) {
        if (r.time_s >= 0.0) out.push_back(r.p_ac_actual);
    }
    return out;
}

std::vector<TrainingSample> run_training_simulation(const ScenarioConfig& cfg, std::span<const House> houses,
                                                    std::span<const TrainingDay> days) {
    std::vector<TrainingSample> samples;
    for (const TrainingDay& day : days) {
        if (!(day.enrolled_fraction > 0.0 && day.enrolled_fraction <= 1.0)) {
            throw ParameterDomainError("training day enrollment must lie in (0, 1]");
        }
        const auto enrolled = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(day.enrolled_fraction * static_cast<double>(houses.size()))));
        const auto subset = houses.first(std::min(enrolled, houses.size()));
        double total_rated = 0.0;
        for (const House& h : subset) total_rated += h.agent.rated_power;

        ScenarioConfig day_cfg = cfg;
        day_cfg.duration = std::floor(day.traces.duration_s() / cfg.control_cycle) * cfg.control_cycle;
        const RunResult run = run_uncontrolled(day_cfg, subset, day.traces);
        for (const RecordRow& r : run.rows) {
            if (r.time_s < 0.0) continue;
            const std::size_t idx = day.traces.index_at(r.time_s);
            samples.push_back(TrainingSample{day.traces.t_out[idx], day.traces.solar[idx], total_rated, r.p_ac_actual});
        }
    }
    return samples;
}

std::vector<TrainingDay> split_training_days(const TraceSet& traces, std::span<const double> enrollment) {
    const std::size_t per_day = static_cast<std::size_t>(std::llround(86400.0 / traces.step_s));
    const std::size_t days = traces.size() / per_day;
    if (days == 0) throw ParameterDomainError("training traces shorter than one day");
    std::vector<TrainingDay> out;
    for (std::size_t d = 0; d < days; ++d) {
        const double f = enrollment.empty() ? 1.0 : enrollment[d % enrollment.size()];
        out.push_back(TrainingDay{traces.slice(d * per_day, per_day), f});
    }
    return out;
}

} // namespace tieline
