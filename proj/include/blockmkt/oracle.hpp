#pragma once

#include <vector>

#include "blockmkt/model.hpp"

namespace blockmkt {

/// A joint action profile: per-miner contest investment and auction reserve.
struct StrategyProfile {
    std::vector<double> investments;
    std::vector<double> reserves;
};

struct GridConfig {
    int q_points = 512;
    int r_points = 512;
    double q_max_multiplier = 4.0;  // search ceiling as a multiple of the analytic total
    double tolerance = 1e-7;
};

/// Exact payoff of one miner under an arbitrary profile: appends split
/// proportionally to investment, the induced book clears canonically, and the
/// miner collects sold*(price - c^W_i) - q_i*c^R_i + B*Q_A*q_i/sum(q).
double profile_payoff(const LedgerMarket& market, const StrategyProfile& profile, int miner);

struct BestResponse {
    double payoff;
    double investment;
    double reserve;
};

/// Brute-force best response of one miner: a product grid over investment in
/// [0, q_max] and reserve in [0, reserve_cap], augmented with the analytic
/// best reserves for each trial investment. The current strategy is always in
/// the search set.
BestResponse best_response(const LedgerMarket& market, const StrategyProfile& profile,
                           int miner, const GridConfig& grid);

/// Equilibrium verdict at grid resolution: no miner may gain more than
/// grid.tolerance by deviating. The witness records the worst violation.
Verdict verify_equilibrium(const LedgerMarket& market, const StrategyProfile& profile,
                           const GridConfig& grid);
Verdict verify_candidate(const LedgerMarket& market, const EquilibriumCandidate& candidate,
                         const GridConfig& grid);

struct BidLot {
    double mass;
    double bid;
};

struct AuctionResult {
    std::vector<BidLot> winners;  // each pays its own bid
    double effective_price;
    double cleared_mass;
};

/// Mechanical single-auction rule for a continuum of bidders: with B(q) the
/// mass bidding at least q, everyone above max{B^{-1}_sup(capacity), reserve}
/// wins at their bid, everyone below loses, and the marginal bid mass is
/// pro-rated so exactly min{B(reserve), capacity} clears.
AuctionResult fpa_rule_apply(const std::vector<BidLot>& bids, double capacity, double reserve);

}  // namespace blockmkt
