#include "tieline/population.hpp"

#include "tieline/errors.hpp"
#include "tieline/rng.hpp"

#include <fmt/format.h>

#include <cmath>

namespace tieline {

namespace {

constexpr int kMaxAttempts = 100;
constexpr double kTruncationSigmas = 3.0;

void validate_distribution(const Distribution& d, const char* name) {
    if (const auto* u = std::get_if<UniformDist>(&d)) {
        if (!(u->a <= u->b) || !std::isfinite(u->a) || !std::isfinite(u->b)) {
            throw ParameterDomainError(fmt::format("{}: uniform bounds must satisfy a <= b", name));
        }
    } else {
        const auto& n = std::get<NormalDist>(d);
        if (!(n.stddev > 0.0) || !std::isfinite(n.mean)) {
            throw ParameterDomainError(fmt::format("{}: normal stddev must be positive", name));
        }
    }
}

} // namespace

double sample(const Distribution& d, CounterRng& rng) {
    if (const auto* u = std::get_if<UniformDist>(&d)) {
        return rng.uniform(u->a, u->b);
    }
    const auto& n = std::get<NormalDist>(d);
    for (;;) {
        const double z = rng.standard_normal();
        if (std::abs(z) <= kTruncationSigmas) return n.mean + n.stddev * z;
    }
}

double distribution_mean(const Distribution& d) {
    if (const auto* u = std::get_if<UniformDist>(&d)) return 0.5 * (u->a + u->b);
    return std::get<NormalDist>(d).mean;
}

std::string describe(const Distribution& d) {
    if (const auto* u = std::get_if<UniformDist>(&d)) return fmt::format("U({},{})", u->a, u->b);
    const auto& n = std::get<NormalDist>(d);
    return fmt::format("N({},{})", n.mean, n.stddev);
}

void validate(const PopulationSpec& spec) {
    validate_distribution(spec.floor_area, "floor_area");
    validate_distribution(spec.air_change_rate, "air_change_rate");
    validate_distribution(spec.window_wall_ratio, "window_wall_ratio");
    validate_distribution(spec.shgc, "shgc");
    validate_distribution(spec.eer, "eer");
    validate_distribution(spec.r_roof, "r_roof");
    validate_distribution(spec.r_wall, "r_wall");
    validate_distribution(spec.r_floor, "r_floor");
    validate_distribution(spec.r_window, "r_window");
    validate_distribution(spec.r_door, "r_door");
    validate_distribution(spec.deadband, "deadband");
    validate_distribution(spec.t_set, "t_set");
    validate_distribution(spec.t_high, "t_high");
    validate_distribution(spec.t_low, "t_low");
    if (!(spec.ceiling_height > 0.0 && spec.door_area > 0.0)) {
        throw ParameterDomainError("ceiling_height and door_area must be positive");
    }
}

House generate_house(const PopulationSpec& spec, std::uint64_t seed, std::size_t index) {
    CounterRng rng(seed, stream_id("population"), index);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        House h;
        HouseGeometry& g = h.geometry;
        g.floor_area = sample(spec.floor_area, rng);
        g.air_change_rate = sample(spec.air_change_rate, rng);
        g.window_wall_ratio = sample(spec.window_wall_ratio, rng);
        g.shgc = sample(spec.shgc, rng);
        g.eer = sample(spec.eer, rng);
        g.r_roof = sample(spec.r_roof, rng);
        g.r_wall = sample(spec.r_wall, rng);
        g.r_floor = sample(spec.r_floor, rng);
        g.r_window = sample(spec.r_window, rng);
        g.r_door = sample(spec.r_door, rng);
        g.ceiling_height = spec.ceiling_height;
        g.door_area = spec.door_area;

        const double deadband = sample(spec.deadband, rng);
        const double t_set = sample(spec.t_set, rng);
        const double t_high = sample(spec.t_high, rng);
        const double t_low = sample(spec.t_low, rng);
        try {
            if (!(g.air_change_rate > 0.0)) continue;
            h.etp = derive_etp_params(g, spec.mapping);
            h.agent = make_agent_config(t_set, deadband, t_high, t_low, quantize_power(h.etp.rated_electrical_power / 1000.0));
            return h;
        } catch (const ParameterDomainError&) {
            // redraw
        }
    }
    throw ParameterDomainError(
        fmt::format("generate_population: house {} violates invariants after {} attempts", index, kMaxAttempts));
}

std::vector<House> generate_population(const PopulationSpec& spec, std::uint64_t seed) {
    validate(spec);
    std::vector<House> houses;
    houses.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) houses.push_back(generate_house(spec, seed, i));
    return houses;
}

} // namespace tieline
