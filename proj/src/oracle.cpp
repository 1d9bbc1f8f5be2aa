#include "blockmkt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "blockmkt/clearing.hpp"

namespace blockmkt {

namespace {

void validate_profile(const LedgerMarket& market, const StrategyProfile& profile) {
    if (static_cast<int>(profile.investments.size()) != market.miners() ||
        static_cast<int>(profile.reserves.size()) != market.miners())
        throw std::invalid_argument("oracle: profile size does not match the market");
    for (double q : profile.investments)
        if (q < 0.0 || !std::isfinite(q)) throw std::domain_error("oracle: bad investment");
    for (double r : profile.reserves)
        if (r < 0.0 || !std::isfinite(r)) throw std::domain_error("oracle: bad reserve");
}

// analytic total investment of the market-clearing candidate, used to scale
// the search ceiling; 0 when the per-append prize vanishes
double analytic_total_investment(const LedgerMarket& market) {
    double r = market.saturation_price();
    if (market.symmetric()) {
        double prize = r + market.block_reward - market.write_cost;
        if (prize <= 0.0) return 0.0;
        return market.append_supply * prize / c_star(market.resource_costs).c_star;
    }
    try {
        return market.append_supply / market.shares_at(r).c_star;
    } catch (const std::domain_error&) {
        return 0.0;
    }
}

}  // namespace

double profile_payoff(const LedgerMarket& market, const StrategyProfile& profile, int miner) {
    validate_profile(market, profile);
    double sum_q = 0.0;
    for (double q : profile.investments) sum_q += q;
    if (!(sum_q > 0.0)) return 0.0;
    const double q_i = profile.investments[miner];

    SellerBook book;
    book.offers.reserve(profile.investments.size());
    for (size_t j = 0; j < profile.investments.size(); ++j)
        book.offers.push_back({market.append_supply * profile.investments[j] / sum_q,
                               profile.reserves[j], static_cast<int>(j)});
    ClearingOutcome out = canonical_clear(book, market.curve);

    return out.sold[miner] * (out.price - market.write_cost_of(miner)) -
           q_i * market.resource_costs[miner] +
           market.block_reward * market.append_supply * q_i / sum_q;
}

BestResponse best_response(const LedgerMarket& market, const StrategyProfile& profile,
                           int miner, const GridConfig& grid) {
    validate_profile(market, profile);
    if (grid.q_points < 2 || grid.r_points < 2)
        throw std::invalid_argument("best_response: grid needs at least two points per axis");

    const double p0 = market.saturation_price();
    const double r_cap = reserve_cap(market, miner);
    const double cw = market.write_cost_of(miner);
    const double q_a = market.append_supply;

    double profile_total = 0.0;
    for (double q : profile.investments) profile_total += q;
    double others_total = profile_total - profile.investments[miner];

    double base = std::max(analytic_total_investment(market), profile_total);
    if (!(base > 0.0)) {
        // degenerate zero-prize candidates: fall back to the scale at which
        // buying the whole supply outright stops paying for itself
        double x_rev = max_revenue_by_quantity(market.curve, cw, q_a).value;
        base = (x_rev + market.block_reward * q_a) / market.resource_costs[miner];
        if (!(base > 0.0)) base = 1.0;
    }
    double q_hi = grid.q_max_multiplier * base;

    // distinct rival reserve levels bound the intervals on which the
    // price-setting residual has a fixed form
    std::vector<double> rival_reserves;
    for (size_t j = 0; j < profile.reserves.size(); ++j)
        if (static_cast<int>(j) != miner && profile.investments[j] > 0.0)
            rival_reserves.push_back(profile.reserves[j]);
    std::sort(rival_reserves.begin(), rival_reserves.end());
    rival_reserves.erase(std::unique(rival_reserves.begin(), rival_reserves.end()),
                         rival_reserves.end());

    StrategyProfile trial = profile;
    BestResponse best{-std::numeric_limits<double>::infinity(), profile.investments[miner],
                      profile.reserves[miner]};
    auto consider = [&](double q, double r) {
        if (q < 0.0 || r < 0.0) return;
        trial.investments[miner] = q;
        trial.reserves[miner] = std::min(r, r_cap);
        double v = profile_payoff(market, trial, miner);
        if (v > best.payoff) best = {v, trial.investments[miner], trial.reserves[miner]};
    };

    std::vector<double> fixed_reserves = {0.0, p0, r_cap, profile.reserves[miner]};
    for (double rr : rival_reserves) fixed_reserves.push_back(std::min(rr, r_cap));

    std::vector<double> q_values;
    q_values.reserve(grid.q_points + 1);
    for (int kq = 0; kq < grid.q_points; ++kq)
        q_values.push_back(q_hi * kq / (grid.q_points - 1));
    q_values.push_back(profile.investments[miner]);  // the current point

    for (double q : q_values) {
        for (int kr = 0; kr < grid.r_points; ++kr)
            consider(q, r_cap * kr / (grid.r_points - 1));
        for (double r : fixed_reserves) consider(q, r);

        // analytic best reserves for this investment: one residual argmax per
        // rival-reserve interval (rivals priced above the trial reserve do
        // not sell, so the residual offset steps at each rival level)
        double q_i_share = (q + others_total > 0.0) ? q_a * q / (q + others_total) : q_a;
        double lo = p0;
        for (size_t lev = 0; lev <= rival_reserves.size(); ++lev) {
            double hi = lev < rival_reserves.size() ? std::min(rival_reserves[lev], r_cap) : r_cap;
            if (hi > lo) {
                double overhang = 0.0;  // rival quantity reserved above this interval
                for (size_t j = 0; j < profile.reserves.size(); ++j)
                    if (static_cast<int>(j) != miner && profile.reserves[j] > lo &&
                        q + others_total > 0.0)
                        overhang += q_a * profile.investments[j] / (q + others_total);
                double offset = q_i_share - q_a + overhang;
                PricePoint opt = max_margin_times_residual(market.curve, cw, offset, lo,
                                                           std::min(hi, market.curve.v_max()));
                consider(q, opt.price);
            }
            lo = std::max(lo, hi);
            if (lo >= r_cap) break;
        }
    }
    return best;
}

Verdict verify_equilibrium(const LedgerMarket& market, const StrategyProfile& profile,
                           const GridConfig& grid) {
    Verdict v;
    v.max_gain = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < market.miners(); ++i) {
        double have = profile_payoff(market, profile, i);
        BestResponse br = best_response(market, profile, i, grid);
        double gain = br.payoff - have;
        if (gain > v.max_gain) {
            v.max_gain = gain;
            v.witness = DeviationWitness{i, br.investment, br.reserve, gain};
        }
    }
    v.is_equilibrium = v.max_gain <= grid.tolerance;
    if (v.is_equilibrium) v.witness.reset();
    return v;
}

Verdict verify_candidate(const LedgerMarket& market, const EquilibriumCandidate& candidate,
                         const GridConfig& grid) {
    return verify_equilibrium(market, {candidate.investments, candidate.reserves}, grid);
}

AuctionResult fpa_rule_apply(const std::vector<BidLot>& bids, double capacity, double reserve) {
    for (const auto& b : bids) {
        if (!(b.mass > 0.0)) throw std::domain_error("fpa_rule_apply: masses must be positive");
        if (b.bid < 0.0) throw std::domain_error("fpa_rule_apply: negative bid");
    }
    AuctionResult out{{}, reserve, 0.0};
    if (!(capacity > 0.0)) return out;

    double at_least_reserve = 0.0;
    for (const auto& b : bids)
        if (b.bid >= reserve) at_least_reserve += b.mass;

    if (at_least_reserve < capacity) {
        // undersubscribed: everything at or above the reserve wins
        for (const auto& b : bids)
            if (b.bid >= reserve) out.winners.push_back(b);
        out.cleared_mass = at_least_reserve;
        out.effective_price = reserve;
        return out;
    }

    // oversubscribed: find the threshold bid t = B^{-1}_sup(capacity), the
    // largest level with at least `capacity` mass bidding at or above it
    std::vector<double> levels;
    for (const auto& b : bids) levels.push_back(b.bid);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    double t = levels.back();
    for (double lv : levels) {
        double mass_at_or_above = 0.0;
        for (const auto& b : bids)
            if (b.bid >= lv) mass_at_or_above += b.mass;
        if (mass_at_or_above >= capacity) {
            t = lv;
            break;
        }
    }

    double above = 0.0, at = 0.0;
    for (const auto& b : bids) {
        if (b.bid > t) above += b.mass;
        else if (b.bid == t) at += b.mass;
    }
    double marginal_win = std::max(0.0, capacity - above);  // mass winning at exactly t
    for (const auto& b : bids) {
        if (b.bid > t) out.winners.push_back(b);
        else if (b.bid == t && at > 0.0 && marginal_win > 0.0)
            out.winners.push_back({b.mass * marginal_win / at, b.bid});
    }
    out.cleared_mass = std::min(above + marginal_win, capacity);
    out.effective_price = std::max(t, reserve);
    return out;
}

}  // namespace blockmkt
