#include "tieline/agent.hpp"

#include "tieline/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tieline {

AclAgentConfig make_agent_config(double t_set, double deadband, double t_high, double t_low, double rated_power) {
    AclAgentConfig cfg{t_set, deadband, t_high, t_low, rated_power, default_epsilon(deadband)};
    validate(cfg);
    return cfg;
}

void validate(const AclAgentConfig& cfg) {
    if (!std::isfinite(cfg.t_set)) throw ParameterDomainError("t_set must be finite");
    if (!(cfg.t_high > 0.0 && cfg.t_low > 0.0)) throw ParameterDomainError("t_high and t_low must be positive");
    const double narrow = std::min(cfg.t_high, cfg.t_low);
    if (!(cfg.deadband > 0.0 && cfg.deadband < narrow)) {
        throw ParameterDomainError("deadband must lie in (0, min(t_high, t_low))");
    }
    if (!(cfg.epsilon > 0.0 && cfg.epsilon + 0.5 * cfg.deadband <= narrow)) {
        throw ParameterDomainError("epsilon must be positive with epsilon + deadband/2 <= min(t_high, t_low)");
    }
    if (!(cfg.rated_power > 0.0)) throw ParameterDomainError("rated_power must be positive");
}

AclAgentState initial_agent_state(const AclAgentConfig& cfg, bool compressor_on) {
    return AclAgentState{compressor_on, 0.0, cfg.t_set};
}

double compute_soa(double t_air, const AclAgentConfig& cfg) {
    const double d = t_air - cfg.t_set;
    const double soa = d >= 0.0 ? d / cfg.t_high : d / cfg.t_low;
    return std::clamp(soa, -1.0, 1.0);
}

Bid make_bid(const AclAgentState& state, const AclAgentConfig& cfg, AgentId id) {
    return Bid{state.soa, cfg.rated_power, state.compressor_on, id};
}

AclAgentState apply_clearing_price(double p_star, AclAgentState state, const AclAgentConfig& cfg) {
    state.active_setpoint = p_star >= state.soa ? cfg.t_max() - cfg.epsilon : cfg.t_min() + cfg.epsilon;
    return state;
}

AclAgentState thermostat_step(double t_air, AclAgentState state, const AclAgentConfig& cfg) {
    const double half = 0.5 * cfg.deadband;
    if (t_air > state.active_setpoint + half) {
        state.compressor_on = true;
    } else if (t_air < state.active_setpoint - half) {
        state.compressor_on = false;
    }
    // comfort guard
    if (t_air >= cfg.t_max()) {
        state.compressor_on = true;
    } else if (t_air <= cfg.t_min()) {
        state.compressor_on = false;
    }
    return state;
}

} // namespace tieline
