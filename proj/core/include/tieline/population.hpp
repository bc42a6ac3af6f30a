#pragma once

// Synthesis of the ACL population from the tabulated parameter
// distributions.

#include "tieline/agent.hpp"
#include "tieline/thermal.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace tieline {

class CounterRng;

struct UniformDist {
    double a = 0.0;
    double b = 1.0;
};

/// Normal distribution; draws are truncated at +/- 3 sigma.
struct NormalDist {
    double mean = 0.0;
    double stddev = 1.0;
};

using Distribution = std::variant<UniformDist, NormalDist>;

double sample(const Distribution& d, CounterRng& rng);
double distribution_mean(const Distribution& d);
std::string describe(const Distribution& d);

struct PopulationSpec {
    std::size_t n = 450;

    // houses
    Distribution floor_area = UniformDist{88.0, 176.0};
    Distribution air_change_rate = NormalDist{0.5, 0.06};
    Distribution window_wall_ratio = NormalDist{0.15, 0.01};
    Distribution shgc = UniformDist{0.22, 0.5};
    Distribution eer = UniformDist{3.0, 4.0};
    Distribution r_roof = NormalDist{5.28, 0.70};
    Distribution r_wall = NormalDist{2.99, 0.35};
    Distribution r_floor = NormalDist{3.35, 0.35};
    Distribution r_window = NormalDist{0.38, 0.03};
    Distribution r_door = NormalDist{0.88, 0.07};
    double ceiling_height = 2.5;
    double door_area = 2.0;

    // controllers
    Distribution deadband = UniformDist{0.2, 0.4};
    Distribution t_set = NormalDist{26.0, 0.5};
    Distribution t_high = UniformDist{2.0, 3.0};
    Distribution t_low = UniformDist{2.0, 3.0};

    EtpMapping mapping{};
};

void validate(const PopulationSpec& spec);

struct House {
    HouseGeometry geometry;
    AclAgentConfig agent;
    EtpParameters etp;
};

/// n independent houses, house i drawn from its own random stream. Draws
/// that violate a module invariant are redrawn (at most 100 attempts per
/// house, then ParameterDomainError).
std::vector<House> generate_population(const PopulationSpec& spec, std::uint64_t seed);

/// One house from its stream; generate_population(spec, seed)[i] equals
/// generate_house(spec, seed, i).
House generate_house(const PopulationSpec& spec, std::uint64_t seed, std::size_t index);

} // namespace tieline
