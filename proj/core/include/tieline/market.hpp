#pragma once

// Virtual market of the microgrid control center: demand-curve aggregation,
// clearing against a target power and net-load estimation from the
// tie-line measurement.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tieline {

using AgentId = std::uint32_t;

/// Power values (kW) live on a dyadic grid so that sums over any subset of
/// bids, loads and generation are exact and order-independent (up to 2^32 kW).
inline constexpr double kPowerQuantum = 1.0 / 1048576.0;

inline double quantize_power(double kw) noexcept { return std::nearbyint(kw / kPowerQuantum) * kPowerQuantum; }

/// Sentinel clearing prices. Bid prices are SOA values in [-1, 1], so
/// anything outside that range unambiguously switches everyone.
inline constexpr double kAllOffPrice = 2.0;
inline constexpr double kAllOnPrice = -2.0;

struct Bid {
    double price = 0.0;    // SOA of the bidding ACL
    double quantity = 0.0; // kW, rated electrical power
    bool on_state = false;
    AgentId agent_id = 0;
};

struct DemandStep {
    Bid bid;
    double cumulative = 0.0; // kW, running sum including this step
};

/// Bids sorted by descending price (agent_id ascending among equal prices).
struct DemandCurve {
    std::vector<DemandStep> steps;
    double total_quantity = 0.0;
};

enum class ClearingSentinel { normal, all_on, all_off };

struct ClearingOutcome {
    double p_star = kAllOffPrice;
    double committed_power = 0.0;
    ClearingSentinel sentinel = ClearingSentinel::all_off;
    std::size_t committed_count = 0; // length of the committed prefix of the curve
};

/// Throws EmptyMarketError for an empty batch and ParameterDomainError for
/// a bid with non-positive quantity or a price outside [-1, 1].
DemandCurve build_demand_curve(std::span<const Bid> bids);

/// Clears the curve against `target` kW.
///
/// Equal-price bids form one block: a single broadcast price cannot switch
/// one twin without the other, so the cut is only ever placed between
/// distinct price levels. Inside a block the commitment is the prefix
/// (with or without the block) closest to the target, ties toward
/// including it; p_star is the midpoint between the last committed and the
/// first uncommitted price, with virtual prices +2 / -2 beyond the ends.
ClearingOutcome clear_market(const DemandCurve& curve, double target);

/// P_L - P_w reconstructed from the tie-line reading: P_g minus the rated
/// power of every bidder that reported itself on. No clamping.
double estimate_net_load(double p_g_measured, std::span<const Bid> bids);

/// Power the broadcast price alone switches on: sum of quantities of bids
/// priced strictly above p_star.
double power_above_price(std::span<const Bid> bids, double p_star);

/// Wire payload an agent emits: exactly "price,quantity,on_state".
std::string encode_bid_payload(const Bid& bid);

/// Audit log format: header `agent_id,price,quantity,on_state`, one bid per line.
void write_bid_batch(std::ostream& os, std::span<const Bid> bids);
std::vector<Bid> read_bid_batch(std::istream& is);

void write_clearing_outcome(std::ostream& os, const ClearingOutcome& outcome);

const char* to_string(ClearingSentinel s);

} // namespace tieline
