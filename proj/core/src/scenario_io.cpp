#include "tieline/scenario_io.hpp"

#include "tieline/errors.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <istream>
#include <ostream>
#include <set>

namespace tieline {

namespace {

// Field tables shared by the reader and the writer.
template <class T>
struct Field {
    const char* key;
    T PopulationSpec::*member;
};

const Field<Distribution> kHouseDistributions[] = {
    {"floor_area", &PopulationSpec::floor_area},
    {"air_change_rate", &PopulationSpec::air_change_rate},
    {"window_wall_ratio", &PopulationSpec::window_wall_ratio},
    {"shgc", &PopulationSpec::shgc},
    {"eer", &PopulationSpec::eer},
    {"r_roof", &PopulationSpec::r_roof},
    {"r_wall", &PopulationSpec::r_wall},
    {"r_floor", &PopulationSpec::r_floor},
    {"r_window", &PopulationSpec::r_window},
    {"r_door", &PopulationSpec::r_door},
};

const Field<Distribution> kControllerDistributions[] = {
    {"deadband", &PopulationSpec::deadband},
    {"t_set", &PopulationSpec::t_set},
    {"t_high", &PopulationSpec::t_high},
    {"t_low", &PopulationSpec::t_low},
};

struct MappingField {
    const char* key;
    double EtpMapping::*member;
};

const MappingField kMappingFields[] = {
    {"air_density", &EtpMapping::air_density},
    {"air_specific_heat", &EtpMapping::air_specific_heat},
    {"air_capacity_multiplier", &EtpMapping::air_capacity_multiplier},
    {"mass_to_air_capacity", &EtpMapping::mass_to_air_capacity},
    {"interior_surface_coeff", &EtpMapping::interior_surface_coeff},
    {"interior_wall_ratio", &EtpMapping::interior_wall_ratio},
    {"solar_incidence_factor", &EtpMapping::solar_incidence_factor},
    {"cooling_oversize", &EtpMapping::cooling_oversize},
    {"design_outdoor_temp", &EtpMapping::design_outdoor_temp},
    {"design_indoor_temp", &EtpMapping::design_indoor_temp},
};

struct ShapeField {
    const char* key;
    double TraceShape::*member;
};

const ShapeField kShapeFields[] = {
    {"t_out_min", &TraceShape::t_out_min},
    {"t_out_max", &TraceShape::t_out_max},
    {"t_out_min_hour", &TraceShape::t_out_min_hour},
    {"t_out_max_hour", &TraceShape::t_out_max_hour},
    {"day_temp_spread", &TraceShape::day_temp_spread},
    {"t_out_noise", &TraceShape::t_out_noise},
    {"solar_peak", &TraceShape::solar_peak},
    {"sunrise_hour", &TraceShape::sunrise_hour},
    {"sunset_hour", &TraceShape::sunset_hour},
    {"cloud_depth", &TraceShape::cloud_depth},
    {"load_peak_kw", &TraceShape::load_peak_kw},
    {"load_noise", &TraceShape::load_noise},
    {"wind_mean", &TraceShape::wind_mean},
    {"wind_slow_tau_s", &TraceShape::wind_slow_tau_s},
    {"wind_slow_std", &TraceShape::wind_slow_std},
    {"wind_fast_tau_s", &TraceShape::wind_fast_tau_s},
    {"wind_fast_std", &TraceShape::wind_fast_std},
    {"wind_smoothing_tau_s", &TraceShape::wind_smoothing_tau_s},
};

// Shortest round-trip text, emitted as a plain scalar.
std::string num(double v) { return fmt::format("{}", v); }

void emit_distribution(YAML::Emitter& out, const char* key, const Distribution& d) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap;
    if (const auto* u = std::get_if<UniformDist>(&d)) {
        out << YAML::Key << "uniform" << YAML::Value << YAML::Flow << YAML::BeginSeq << num(u->a) << num(u->b) << YAML::EndSeq;
    } else {
        const auto& n = std::get<NormalDist>(d);
        out << YAML::Key << "normal" << YAML::Value << YAML::Flow << YAML::BeginSeq << num(n.mean) << num(n.stddev)
            << YAML::EndSeq;
    }
    out << YAML::EndMap;
}

// Reject keys the reader does not know so that typos are not silently ignored.
void check_keys(const YAML::Node& node, const char* section, std::initializer_list<const char*> extra,
                std::span<const char* const> known = {}) {
    if (!node.IsMap()) throw FormatError(fmt::format("scenario: '{}' must be a mapping", section));
    std::set<std::string> allowed(extra.begin(), extra.end());
    allowed.insert(known.begin(), known.end());
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.contains(key)) throw FormatError(fmt::format("scenario: unknown key '{}.{}'", section, key));
    }
}

template <class T>
void read_value(const YAML::Node& node, const char* key, T& target, const char* section) {
    const YAML::Node v = node[key];
    if (!v) return;
    try {
        target = v.as<T>();
    } catch (const YAML::Exception&) {
        throw FormatError(fmt::format("scenario: bad value for '{}.{}'", section, key));
    }
}

Distribution read_distribution(const YAML::Node& v, const char* key) {
    if (!v.IsMap() || v.size() != 1) {
        throw FormatError(fmt::format("scenario: '{}' must be {{uniform: [a, b]}} or {{normal: [mean, std]}}", key));
    }
    const auto kind = v.begin()->first.as<std::string>();
    const YAML::Node args = v.begin()->second;
    if (!args.IsSequence() || args.size() != 2) {
        throw FormatError(fmt::format("scenario: '{}' needs exactly two parameters", key));
    }
    try {
        const double p0 = args[0].as<double>();
        const double p1 = args[1].as<double>();
        if (kind == "uniform") return UniformDist{p0, p1};
        if (kind == "normal") return NormalDist{p0, p1};
    } catch (const YAML::Exception&) {
        throw FormatError(fmt::format("scenario: bad parameters for '{}'", key));
    }
    throw FormatError(fmt::format("scenario: unknown distribution '{}' for '{}'", kind, key));
}

template <class Table>
std::vector<const char*> keys_of(const Table& table) {
    std::vector<const char*> keys;
    for (const auto& f : table) keys.push_back(f.key);
    return keys;
}

} // namespace

void validate(const Scenario& s) {
    validate(s.config);
    validate(s.population);
    validate(s.mgcc);
    validate(s.trace_shape);
    if (s.population.n != s.config.n_acl) throw ParameterDomainError("population size must equal n_acl");
    if (s.days < 1) throw ParameterDomainError("days must be at least 1");
    if (s.training_days < 1) throw ParameterDomainError("training_days must be at least 1");
    for (double f : s.training_enrollment) {
        if (!(f > 0.0 && f <= 1.0)) throw ParameterDomainError("training enrollment fractions must lie in (0, 1]");
    }
}

void write_scenario(std::ostream& os, const Scenario& s) {
    const ScenarioConfig& c = s.config;
    YAML::Emitter out;
    out << YAML::Comment("Microgrid tie-line smoothing scenario") << YAML::Newline;
    out << YAML::BeginMap;

    out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n_acl" << YAML::Value << c.n_acl;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "sim_step_s" << YAML::Value << num(c.sim_step);
    out << YAML::Key << "record_cycle_s" << YAML::Value << num(c.record_cycle);
    out << YAML::Key << "control_cycle_s" << YAML::Value << num(c.control_cycle);
    out << YAML::Key << "bid_lead_s" << YAML::Value << num(c.bid_lead);
    out << YAML::Key << "duration_s" << YAML::Value << num(c.duration);
    out << YAML::Key << "warmup_s" << YAML::Value << num(c.warmup) << YAML::Comment("simulated before t = 0, excluded from metrics");
    out << YAML::Key << "wind_capacity_ratio" << YAML::Value << num(c.wind_capacity_ratio);
    out << YAML::Key << "acl_peak_share" << YAML::Value << num(c.acl_peak_share);
    out << YAML::Key << "baseline_bias" << YAML::Value << num(c.baseline_bias);
    out << YAML::Key << "soa_feedback_enabled" << YAML::Value << c.soa_feedback_enabled;
    out << YAML::Key << "workers" << YAML::Value << c.workers;
    out << YAML::Key << "comfort_margin_c" << YAML::Value << num(c.comfort_margin);
    out << YAML::EndMap;

    out << YAML::Key << "traces" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "file" << YAML::Value << s.traces_file;
    out << YAML::Key << "days" << YAML::Value << s.days;
    out << YAML::Key << "training_file" << YAML::Value << s.training_traces_file;
    out << YAML::Key << "training_days" << YAML::Value << s.training_days;
    out << YAML::Key << "training_enrollment" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double f : s.training_enrollment) out << num(f);
    out << YAML::EndSeq
        << YAML::Comment("share of the population enrolled on each training day");
    out << YAML::EndMap;

    out << YAML::Key << "houses" << YAML::Value << YAML::BeginMap;
    for (const auto& f : kHouseDistributions) emit_distribution(out, f.key, s.population.*f.member);
    out << YAML::Key << "ceiling_height" << YAML::Value << num(s.population.ceiling_height);
    out << YAML::Key << "door_area" << YAML::Value << num(s.population.door_area);
    out << YAML::EndMap;

    out << YAML::Key << "controllers" << YAML::Value << YAML::BeginMap;
    for (const auto& f : kControllerDistributions) emit_distribution(out, f.key, s.population.*f.member);
    out << YAML::EndMap;

    out << YAML::Key << "thermal_mapping" << YAML::Value << YAML::BeginMap;
    for (const auto& f : kMappingFields) out << YAML::Key << f.key << YAML::Value << num(s.population.mapping.*f.member);
    out << YAML::EndMap;

    const MgccConfig& m = s.mgcc;
    out << YAML::Key << "mgcc" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "tau_min" << YAML::Value << num(m.tau / 60.0);
    out << YAML::Key << "s1" << YAML::Value << num(m.correction.s1);
    out << YAML::Key << "s2" << YAML::Value << num(m.correction.s2);
    out << YAML::Key << "s3" << YAML::Value << num(m.correction.s3);
    out << YAML::Key << "dp1_percent" << YAML::Value << num(m.correction.dp1);
    out << YAML::Key << "dp2_percent" << YAML::Value << num(m.correction.dp2);
    out << YAML::Key << "dp3_percent" << YAML::Value << num(m.correction.dp3);
    out << YAML::Key << "gamma" << YAML::Value << num(m.correction.gamma);
    out << YAML::EndMap;

    out << YAML::Key << "trace_shape" << YAML::Value << YAML::BeginMap;
    for (const auto& f : kShapeFields) out << YAML::Key << f.key << YAML::Value << num(s.trace_shape.*f.member);
    out << YAML::EndMap;

    out << YAML::EndMap;
    os << out.c_str() << '\n';
}

Scenario read_scenario(std::istream& is) {
    YAML::Node root;
    try {
        root = YAML::Load(is);
    } catch (const YAML::Exception& e) {
        throw FormatError(std::string("scenario: ") + e.what());
    }
    Scenario s;
    if (!root || root.IsNull()) return s;
    check_keys(root, "<root>", {"simulation", "traces", "houses", "controllers", "thermal_mapping", "mgcc", "trace_shape"});

    if (const YAML::Node n = root["simulation"]) {
        check_keys(n, "simulation",
                   {"n_acl", "seed", "sim_step_s", "record_cycle_s", "control_cycle_s", "bid_lead_s", "duration_s",
                    "warmup_s", "wind_capacity_ratio", "acl_peak_share", "baseline_bias", "soa_feedback_enabled",
                    "workers", "comfort_margin_c"});
        ScenarioConfig& c = s.config;
        read_value(n, "n_acl", c.n_acl, "simulation");
        read_value(n, "seed", c.seed, "simulation");
        read_value(n, "sim_step_s", c.sim_step, "simulation");
        read_value(n, "record_cycle_s", c.record_cycle, "simulation");
        read_value(n, "control_cycle_s", c.control_cycle, "simulation");
        read_value(n, "bid_lead_s", c.bid_lead, "simulation");
        read_value(n, "duration_s", c.duration, "simulation");
        read_value(n, "warmup_s", c.warmup, "simulation");
        read_value(n, "wind_capacity_ratio", c.wind_capacity_ratio, "simulation");
        read_value(n, "acl_peak_share", c.acl_peak_share, "simulation");
        read_value(n, "baseline_bias", c.baseline_bias, "simulation");
        read_value(n, "soa_feedback_enabled", c.soa_feedback_enabled, "simulation");
        read_value(n, "workers", c.workers, "simulation");
        read_value(n, "comfort_margin_c", c.comfort_margin, "simulation");
    }
    s.population.n = s.config.n_acl;

    if (const YAML::Node n = root["traces"]) {
        check_keys(n, "traces", {"file", "days", "training_file", "training_days", "training_enrollment"});
        read_value(n, "file", s.traces_file, "traces");
        read_value(n, "days", s.days, "traces");
        read_value(n, "training_file", s.training_traces_file, "traces");
        read_value(n, "training_days", s.training_days, "traces");
        read_value(n, "training_enrollment", s.training_enrollment, "traces");
    }

    if (const YAML::Node n = root["houses"]) {
        const auto keys = keys_of(kHouseDistributions);
        check_keys(n, "houses", {"ceiling_height", "door_area"}, keys);
        for (const auto& f : kHouseDistributions) {
            if (const YAML::Node v = n[f.key]) s.population.*f.member = read_distribution(v, f.key);
        }
        read_value(n, "ceiling_height", s.population.ceiling_height, "houses");
        read_value(n, "door_area", s.population.door_area, "houses");
    }

    if (const YAML::Node n = root["controllers"]) {
        const auto keys = keys_of(kControllerDistributions);
        check_keys(n, "controllers", {}, keys);
        for (const auto& f : kControllerDistributions) {
            if (const YAML::Node v = n[f.key]) s.population.*f.member = read_distribution(v, f.key);
        }
    }

    if (const YAML::Node n = root["thermal_mapping"]) {
        const auto keys = keys_of(kMappingFields);
        check_keys(n, "thermal_mapping", {}, keys);
        for (const auto& f : kMappingFields) read_value(n, f.key, s.population.mapping.*f.member, "thermal_mapping");
    }

    if (const YAML::Node n = root["mgcc"]) {
        check_keys(n, "mgcc", {"tau_min", "s1", "s2", "s3", "dp1_percent", "dp2_percent", "dp3_percent", "gamma"});
        double tau_min = s.mgcc.tau / 60.0;
        read_value(n, "tau_min", tau_min, "mgcc");
        s.mgcc.tau = tau_min * 60.0;
        CorrectionParams& p = s.mgcc.correction;
        read_value(n, "s1", p.s1, "mgcc");
        read_value(n, "s2", p.s2, "mgcc");
        read_value(n, "s3", p.s3, "mgcc");
        read_value(n, "dp1_percent", p.dp1, "mgcc");
        read_value(n, "dp2_percent", p.dp2, "mgcc");
        read_value(n, "dp3_percent", p.dp3, "mgcc");
        read_value(n, "gamma", p.gamma, "mgcc");
    }
    s.mgcc.control_cycle = s.config.control_cycle;
    s.mgcc.soa_feedback_enabled = s.config.soa_feedback_enabled;

    if (const YAML::Node n = root["trace_shape"]) {
        const auto keys = keys_of(kShapeFields);
        check_keys(n, "trace_shape", {}, keys);
        for (const auto& f : kShapeFields) read_value(n, f.key, s.trace_shape.*f.member, "trace_shape");
    }
    return s;
}

} // namespace tieline
