#pragma once

#include <optional>
#include <vector>

#include "blockmkt/demand.hpp"
#include "blockmkt/tullock.hpp"

namespace blockmkt {

/// A full market instance: protocol parameters, miner cost profiles, and the
/// buyer demand curve. Write costs are a single scalar in the symmetric model
/// or a per-miner vector in the asymmetric one.
struct LedgerMarket {
    DemandCurve curve;
    double append_supply = 0.0;
    double block_reward = 0.0;
    std::vector<double> resource_costs;
    double write_cost = 0.0;
    std::optional<std::vector<double>> write_costs;  // set => asymmetric model

    int miners() const { return static_cast<int>(resource_costs.size()); }
    bool symmetric() const { return !write_costs.has_value(); }
    double write_cost_of(int i) const { return write_costs ? (*write_costs)[i] : write_cost; }
    /// D^{-1}_sup of the append supply: the lowest feasible clearing price.
    double saturation_price() const { return inverse_sup(curve, append_supply); }
    /// Contest shares at clearing price r (block reward folded in for the
    /// asymmetric model; independent of r and B in the symmetric one).
    ContestShares shares_at(double r) const;
    void validate() const;
};

enum class CandidateKind { MarketClearing, PriceSetter };

/// A joint (investment, reserve) profile built from the equilibrium
/// characterization, together with the implied quantities and payoffs.
struct EquilibriumCandidate {
    CandidateKind kind = CandidateKind::MarketClearing;
    int price_setter = -1;
    double clearing_price = 0.0;
    std::vector<double> investments;
    std::vector<double> reserves;
    std::vector<double> quantities;  // appends won, proportional to investment
    std::vector<double> payoffs;
    bool degenerate = false;  // zero total reward at the clearing price
};

struct DeviationWitness {
    int miner;
    double investment;
    double reserve;
    double gain;
};

struct Verdict {
    bool is_equilibrium = false;
    double max_gain = 0.0;
    std::optional<DeviationWitness> witness;
};

/// Highest reserve a miner would ever set: argmax_{r >= D^{-1}_inf(Q_A)}
/// (r - write_cost_i) * D(r). Anything above it is dominated.
double reserve_cap(const LedgerMarket& market, int miner);

/// The candidate where all appends clear at the saturation price. Degenerate
/// (zero investment) when the per-append prize r + B - c^W vanishes; throws
/// std::domain_error when it is negative.
EquilibriumCandidate market_clearing_candidate(const LedgerMarket& market);

/// The candidate where `miner` alone prices above the saturation price and
/// everyone else sits at reserve 0. In the asymmetric model the price and
/// the shares are coupled and solved by damped fixed-point iteration;
/// non-convergence throws std::runtime_error.
EquilibriumCandidate price_setter_candidate(const LedgerMarket& market, int miner,
                                             double damping = 0.5);

/// Closed-form payoff of the deviation that keeps a (1-y) append share and
/// prices at D^{-1}_sup(z * Q_A), played against the market-clearing profile.
/// Valid for the symmetric model with zero block reward; 0 < y <= z <= 1.
double deviation_payoff_yz(const LedgerMarket& market, int miner, double y, double z);

/// Upper envelope of deviation_payoff_yz over y at fixed z:
/// Reward * (k(z) - 2(1-x*)sqrt(k(z)/z) + (1-x*)^2), exact at z = 1.
double L_value(const LedgerMarket& market, int miner, double z);

struct RegularSufficiency {
    bool holds = false;
    bool degenerate = false;  // D(0) <= Q_A: the bound is vacuous
    double bound = 0.0;       // 1 - 1/(D(0)/Q_A - 1)
    double x_max = 0.0;       // largest contest share
};

/// Sufficient condition for the market-clearing candidate under a regular
/// curve: largest share at most 1 - 1/(D(0)/Q_A - 1). Valid for any block
/// reward. Throws std::domain_error when the curve is not regular.
RegularSufficiency sufficiency_regular(const LedgerMarket& market);

struct ThresholdSufficiency {
    double sup_ratio = 0.0;  // sup_z (k(z)-1) / (2(sqrt(k(z)/z)-1))
    double arg_z = 1.0;
    std::vector<bool> per_miner;  // share_i <= 1 - sup_ratio (with miner's own k)
    bool all_pass = false;
};

/// Exact threshold test for the zero-block-reward market-clearing candidate:
/// equilibrium iff every share is at most 1 - sup_z ratio. The sup is taken
/// over a per-piece grid with golden-section refinement plus the analytic
/// limits at both ends of (0, 1].
ThresholdSufficiency sufficiency_threshold(const LedgerMarket& market);

/// Same candidate at a higher block reward: investments scale by
/// (r + B' - c^W) / (r + B - c^W), reserves unchanged. Symmetric model only.
EquilibriumCandidate block_reward_rescale(const LedgerMarket& market,
                                          const EquilibriumCandidate& candidate,
                                          double new_reward);

struct BlockRewardBound {
    double bound = 0.0;
    double gap = 0.0;  // strict-gap margin the bound is built from
};

/// A block reward large enough for the market-clearing candidate to be an
/// equilibrium, from the deviation-loss bounds. Requires a strict gap between
/// the undercut threshold and the largest miner's append quantity; throws
/// std::domain_error when the gap is not positive.
BlockRewardBound min_block_reward(const LedgerMarket& market);

}  // namespace blockmkt
