#pragma once

// Scenario file: every simulation, population, thermal-mapping, controller
// and trace-shape parameter as a commented YAML document.

#include "tieline/mgcc.hpp"
#include "tieline/population.hpp"
#include "tieline/simulation.hpp"
#include "tieline/traces.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace tieline {

struct Scenario {
    ScenarioConfig config{};
    PopulationSpec population{};
    MgccConfig mgcc{};
    TraceShape trace_shape{};
    std::string traces_file = "traces.csv";                   // relative to the scenario file
    std::string training_traces_file = "training_traces.csv";
    std::size_t days = 1;
    std::size_t training_days = 4;
    std::vector<double> training_enrollment{1.0, 0.9, 0.8, 0.7};
};

/// Throws ParameterDomainError when any section is invalid.
void validate(const Scenario& s);

void write_scenario(std::ostream& os, const Scenario& s);

/// Missing keys keep their defaults; unknown keys and malformed values throw
/// FormatError.
Scenario read_scenario(std::istream& is);

} // namespace tieline
