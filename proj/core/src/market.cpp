#include "tieline/market.hpp"

#include "tieline/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace tieline {

DemandCurve build_demand_curve(std::span<const Bid> bids) {
    if (bids.empty()) {
        throw EmptyMarketError("build_demand_curve: no bids");
    }
    std::vector<Bid> sorted(bids.begin(), bids.end());
    for (const Bid& b : sorted) {
        if (!(b.quantity > 0.0) || !std::isfinite(b.quantity)) {
            throw ParameterDomainError(fmt::format("bid from agent {} has non-positive quantity", b.agent_id));
        }
        if (!(b.price >= -1.0 && b.price <= 1.0)) {
            throw ParameterDomainError(fmt::format("bid from agent {} has price {} outside [-1, 1]", b.agent_id, b.price));
        }
    }
    std::sort(sorted.begin(), sorted.end(), [](const Bid& a, const Bid& b) {
        if (a.price != b.price) return a.price > b.price;
        return a.agent_id < b.agent_id;
    });

    DemandCurve curve;
    curve.steps.reserve(sorted.size());
    double cumulative = 0.0;
    for (const Bid& b : sorted) {
        cumulative += b.quantity;
        curve.steps.push_back(DemandStep{b, cumulative});
    }
    curve.total_quantity = cumulative;
    return curve;
}

ClearingOutcome clear_market(const DemandCurve& curve, double target) {
    ClearingOutcome out;
    if (curve.steps.empty() || target <= 0.0) {
        out.p_star = kAllOffPrice;
        out.committed_power = 0.0;
        out.sentinel = ClearingSentinel::all_off;
        out.committed_count = 0;
        return out;
    }
    const std::size_t n = curve.steps.size();
    if (target >= curve.total_quantity) {
        out.p_star = kAllOnPrice;
        out.committed_power = curve.total_quantity;
        out.sentinel = ClearingSentinel::all_on;
        out.committed_count = n;
        return out;
    }

    // Price-level blocks [begin, end): first index with the block's price up
    // to one past its last step.
    std::size_t begin = 0;
    double before = 0.0; // cumulative power committed ahead of the current block
    std::size_t committed = 0;
    while (begin < n) {
        std::size_t end = begin + 1;
        while (end < n && curve.steps[end].bid.price == curve.steps[begin].bid.price) ++end;
        const double after = curve.steps[end - 1].cumulative;
        if (after >= target) {
            // target lies in (before, after]; an exact hit on `after` is the boundary case
            committed = (std::abs(after - target) <= std::abs(before - target)) ? end : begin;
            break;
        }
        before = after;
        begin = end;
    }

    const double upper = committed == 0 ? kAllOffPrice : curve.steps[committed - 1].bid.price;
    const double lower = committed == n ? kAllOnPrice : curve.steps[committed].bid.price;
    out.p_star = 0.5 * (upper + lower);
    out.committed_power = committed == 0 ? 0.0 : curve.steps[committed - 1].cumulative;
    out.sentinel = ClearingSentinel::normal;
    out.committed_count = committed;
    return out;
}

double estimate_net_load(double p_g_measured, std::span<const Bid> bids) {
    double on_power = 0.0;
    for (const Bid& b : bids) {
        if (b.on_state) on_power += b.quantity;
    }
    return p_g_measured - on_power;
}

double power_above_price(std::span<const Bid> bids, double p_star) {
    // summed in curve order so the result is bitwise comparable with the
    // cumulative column of the demand curve
    std::vector<Bid> sorted(bids.begin(), bids.end());
    std::sort(sorted.begin(), sorted.end(), [](const Bid& a, const Bid& b) {
        if (a.price != b.price) return a.price > b.price;
        return a.agent_id < b.agent_id;
    });
    double total = 0.0;
    for (const Bid& b : sorted) {
        if (b.price > p_star) total += b.quantity;
    }
    return total;
}

std::string encode_bid_payload(const Bid& bid) {
    return fmt::format("{},{},{}", bid.price, bid.quantity, bid.on_state ? 1 : 0);
}

void write_bid_batch(std::ostream& os, std::span<const Bid> bids) {
    os << "agent_id,price,quantity,on_state\n";
    for (const Bid& b : bids) {
        os << fmt::format("{},{},{},{}\n", b.agent_id, b.price, b.quantity, b.on_state ? 1 : 0);
    }
}

std::vector<Bid> read_bid_batch(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("agent_id,price,quantity,on_state", 0) != 0) {
        throw FormatError("bid batch: missing header");
    }
    std::vector<Bid> bids;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id, price, quantity, on;
        if (!std::getline(row, id, ',') || !std::getline(row, price, ',') || !std::getline(row, quantity, ',') ||
            !std::getline(row, on)) {
            throw FormatError(fmt::format("bid batch: malformed line {}", line_no));
        }
        try {
            Bid b;
            b.agent_id = static_cast<AgentId>(std::stoul(id));
            b.price = std::stod(price);
            b.quantity = std::stod(quantity);
            b.on_state = std::stoi(on) != 0;
            bids.push_back(b);
        } catch (const std::exception&) {
            throw FormatError(fmt::format("bid batch: bad number on line {}", line_no));
        }
    }
    return bids;
}

void write_clearing_outcome(std::ostream& os, const ClearingOutcome& outcome) {
    os << "p_star,committed_power,sentinel,committed_count\n";
    os << fmt::format("{},{},{},{}\n", outcome.p_star, outcome.committed_power, to_string(outcome.sentinel),
                      outcome.committed_count);
}

const char* to_string(ClearingSentinel s) {
    switch (s) {
    case ClearingSentinel::normal: return "normal";
    case ClearingSentinel::all_on: return "all_on";
    case ClearingSentinel::all_off: return "all_off";
    }
    return "unknown";
}

} // namespace tieline
