#pragma once

// Local ACL controller: state-of-air (SOA) computation, bidding, the
// setpoint override driven by the clearing price, and the thermostat
// hysteresis that enforces comfort limits.

#include "tieline/market.hpp"

namespace tieline {

struct AclAgentConfig {
    double t_set = 26.0;     // customer setpoint, degC
    double deadband = 0.3;   // hysteresis width, degC
    double t_high = 2.5;     // T_max = t_set + t_high
    double t_low = 2.5;      // T_min = t_set - t_low
    double rated_power = 1.0; // kW electrical
    double epsilon = 0.2;    // override margin inside the comfort limits, degC

    double t_max() const noexcept { return t_set + t_high; }
    double t_min() const noexcept { return t_set - t_low; }
};

/// Default override margin: the smallest value that keeps the hysteresis
/// band around the override strictly inside the comfort limits.
inline double default_epsilon(double deadband) noexcept { return 0.5 * deadband + 0.05; }

/// Builds a config with the default epsilon. Throws ParameterDomainError
/// when the result violates the invariants.
AclAgentConfig make_agent_config(double t_set, double deadband, double t_high, double t_low, double rated_power);

void validate(const AclAgentConfig& cfg);

struct AclAgentState {
    bool compressor_on = false;
    double soa = 0.0;
    double active_setpoint = 26.0;
};

/// Free-running state: setpoint at the customer preference.
AclAgentState initial_agent_state(const AclAgentConfig& cfg, bool compressor_on);

/// Normalised position of t_air inside [T_min, T_max], clamped to [-1, 1].
double compute_soa(double t_air, const AclAgentConfig& cfg);

Bid make_bid(const AclAgentState& state, const AclAgentConfig& cfg, AgentId id);

/// Setpoint override: drift towards T_max - epsilon when p_star >= bid price
/// (the SOA last bid), else pull down to T_min + epsilon.
AclAgentState apply_clearing_price(double p_star, AclAgentState state, const AclAgentConfig& cfg);

/// Hysteresis around the active setpoint plus the hard comfort guard at the
/// limits.
AclAgentState thermostat_step(double t_air, AclAgentState state, const AclAgentConfig& cfg);

} // namespace tieline
