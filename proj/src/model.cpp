#include "blockmkt/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "blockmkt/oracle.hpp"

namespace blockmkt {

namespace {

constexpr double kTol = 1e-12;

StrategyProfile candidate_profile(const EquilibriumCandidate& c) {
    return {c.investments, c.reserves};
}

void fill_payoffs(const LedgerMarket& market, EquilibriumCandidate& cand) {
    StrategyProfile prof = candidate_profile(cand);
    cand.payoffs.resize(cand.investments.size());
    for (size_t i = 0; i < cand.payoffs.size(); ++i)
        cand.payoffs[i] = profile_payoff(market, prof, static_cast<int>(i));
}

// sup over z in (0,1] of (k(z)-1) / (2*(sqrt(k(z)/z)-1)) for the exact cover
// with margin (price - cost). Piece-wise grid plus golden-section refinement,
// with the removable 0/0 point at z=1 replaced by its analytic limit.
struct SupResult {
    double sup = -std::numeric_limits<double>::infinity();
    double arg = 1.0;
};

SupResult sup_cover_ratio(const DemandCurve& curve, double append_supply, double cost) {
    const double p0 = inverse_sup(curve, append_supply);
    const double margin0 = p0 - cost;
    if (margin0 <= 0.0)
        throw std::domain_error("sufficiency_threshold: no margin at the saturation price");

    SupResult best;
    auto ratio = [&](double z) {
        double p = inverse_sup(curve, z * append_supply);
        double q = (p - cost) / margin0;  // k(z)/z
        if (q <= 1.0 + 1e-14) return -std::numeric_limits<double>::infinity();
        double k = q * z;
        return (k - 1.0) / (2.0 * (std::sqrt(q) - 1.0));
    };
    auto consider = [&](double v, double z) {
        if (v > best.sup) {
            best.sup = v;
            best.arg = z;
        }
    };

    const int kGrid = 1024;
    for (const auto& piece : inverse_segments(curve)) {
        double z_lo = std::max(piece.y_lo / append_supply, 1e-9);
        double z_hi = std::min(piece.y_hi / append_supply, 1.0 - 1e-9);
        if (z_lo >= z_hi) continue;
        double prev_best = best.sup;
        int best_k = -1;
        for (int k = 0; k <= kGrid; ++k) {
            double z = z_lo + (z_hi - z_lo) * k / kGrid;
            double v = ratio(z);
            if (v > prev_best) {
                prev_best = v;
                best_k = k;
            }
        }
        if (best_k >= 0) {
            double a = z_lo + (z_hi - z_lo) * std::max(0, best_k - 1) / kGrid;
            double b = z_lo + (z_hi - z_lo) * std::min(kGrid, best_k + 1) / kGrid;
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = ratio(x1), f2 = ratio(x2);
            for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
                if (f1 < f2) {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + gr * (b - a); f2 = ratio(x2);
                } else {
                    b = x2; x2 = x1; f2 = f1;
                    x1 = b - gr * (b - a); f1 = ratio(x1);
                }
            }
            double zm = 0.5 * (a + b);
            consider(ratio(zm), zm);
            consider(prev_best, z_lo + (z_hi - z_lo) * best_k / kGrid);
        }
    }

    // z -> 1 limit: when the inverse is continuous at the full supply the
    // ratio tends to 1 - d(p0+) * margin0 / Q_A; a price jump below the
    // supply leaves no removable point (the grid already covers it).
    for (const auto& piece : inverse_segments(curve)) {
        if (piece.y_lo < append_supply && append_supply <= piece.y_hi + kTol &&
            piece.p_at_ylo > piece.p_at_yhi && std::fabs(piece.price_at(append_supply) - p0) < 1e-9) {
            double d_plus = (piece.y_hi - piece.y_lo) / (piece.p_at_ylo - piece.p_at_yhi);
            consider(1.0 - d_plus * margin0 / append_supply, 1.0);
            break;
        }
    }
    return best;
}

}  // namespace

ContestShares LedgerMarket::shares_at(double r) const {
    if (symmetric()) return c_star(resource_costs);
    return c_star_asym(resource_costs, *write_costs, block_reward, r);
}

void LedgerMarket::validate() const {
    if (miners() < 2) throw std::domain_error("LedgerMarket: need at least two miners");
    for (double c : resource_costs)
        if (!(c > 0.0)) throw std::domain_error("LedgerMarket: resource costs must be positive");
    if (!(append_supply > 0.0)) throw std::domain_error("LedgerMarket: append supply must be positive");
    if (append_supply > curve.mass_at_zero() + kTol)
        throw std::domain_error("LedgerMarket: append supply exceeds D(0)");
    if (block_reward < 0.0) throw std::domain_error("LedgerMarket: negative block reward");
    if (write_costs && static_cast<int>(write_costs->size()) != miners())
        throw std::invalid_argument("LedgerMarket: write cost vector length mismatch");
}

double reserve_cap(const LedgerMarket& market, int miner) {
    double lb = inverse_inf(market.curve, market.append_supply);
    return monopoly_revenue(market.curve, market.write_cost_of(miner), lb).price;
}

EquilibriumCandidate market_clearing_candidate(const LedgerMarket& market) {
    market.validate();
    const int n = market.miners();
    const double r = market.saturation_price();

    EquilibriumCandidate cand;
    cand.kind = CandidateKind::MarketClearing;
    cand.clearing_price = r;
    cand.reserves.assign(n, r);

    double sum_q = 0.0;
    ContestShares cs;
    if (market.symmetric()) {
        double prize = r + market.block_reward - market.write_cost;
        if (prize < -kTol)
            throw std::domain_error("market_clearing_candidate: negative per-append reward");
        cs = c_star(market.resource_costs);
        sum_q = market.append_supply * std::max(0.0, prize) / cs.c_star;
    } else {
        cs = market.shares_at(r);  // throws when fewer than two miners stay viable
        sum_q = market.append_supply / cs.c_star;
    }

    cand.degenerate = !(sum_q > 0.0);
    cand.investments.resize(n);
    cand.quantities.resize(n);
    for (int i = 0; i < n; ++i) {
        cand.investments[i] = cs.shares[i] * sum_q;
        cand.quantities[i] = cand.degenerate ? 0.0 : market.append_supply * cs.shares[i];
    }
    fill_payoffs(market, cand);
    return cand;
}

EquilibriumCandidate price_setter_candidate(const LedgerMarket& market, int miner,
                                             double damping) {
    market.validate();
    const int n = market.miners();
    const double p0 = market.saturation_price();
    const double cw = market.write_cost_of(miner);

    double price = 0.0;
    ContestShares cs;
    double sum_q = 0.0;
    if (market.symmetric()) {
        cs = c_star(market.resource_costs);
        double offset = market.append_supply * (cs.shares[miner] - 1.0);
        price = max_margin_times_residual(market.curve, cw, offset, p0, market.curve.v_max()).price;
        double prize = price + market.block_reward - market.write_cost;
        if (prize < -kTol)
            throw std::domain_error("price_setter_candidate: negative per-append reward");
        sum_q = market.append_supply * std::max(0.0, prize) / cs.c_star;
    } else {
        // price and shares are coupled through the clearing price: damp the
        // alternation between solving shares at r and re-optimizing r
        double r = std::max(p0, reserve_cap(market, miner));
        bool converged = false;
        for (int it = 0; it < 10000; ++it) {
            cs = market.shares_at(r);
            double offset = market.append_supply * (cs.shares[miner] - 1.0);
            double next =
                max_margin_times_residual(market.curve, cw, offset, p0, market.curve.v_max()).price;
            double r_new = (1.0 - damping) * next + damping * r;
            if (std::fabs(r_new - r) <= 1e-9) {
                r = r_new;
                converged = true;
                break;
            }
            r = r_new;
        }
        if (!converged)
            throw std::runtime_error("price_setter_candidate: fixed point did not converge");
        cs = market.shares_at(r);
        price = r;
        sum_q = market.append_supply / cs.c_star;
    }

    EquilibriumCandidate cand;
    cand.kind = CandidateKind::PriceSetter;
    cand.price_setter = miner;
    cand.clearing_price = price;
    cand.degenerate = !(sum_q > 0.0);
    cand.reserves.assign(n, 0.0);
    cand.reserves[miner] = price;
    cand.investments.resize(n);
    cand.quantities.resize(n);
    for (int i = 0; i < n; ++i) {
        cand.investments[i] = cs.shares[i] * sum_q;
        cand.quantities[i] = cand.degenerate ? 0.0 : market.append_supply * cs.shares[i];
    }
    fill_payoffs(market, cand);
    return cand;
}

double deviation_payoff_yz(const LedgerMarket& market, int miner, double y, double z) {
    market.validate();
    if (!market.symmetric() || market.block_reward != 0.0)
        throw std::domain_error("deviation_payoff_yz: defined for the symmetric zero-reward model");
    if (y <= 0.0) throw std::domain_error("deviation_payoff_yz: y = 0 has unbounded investment cost");
    if (y > z || z > 1.0) throw std::domain_error("deviation_payoff_yz: need 0 < y <= z <= 1");

    const double p0 = market.saturation_price();
    const double reward = market.append_supply * (p0 - market.write_cost);
    const double xi = c_star(market.resource_costs).shares[miner];
    double gross = (1.0 - y / z) * z * market.append_supply *
                   (inverse_sup(market.curve, z * market.append_supply) - market.write_cost);
    double invest = (1.0 / y - 1.0) * (1.0 - xi) * (1.0 - xi) * reward;
    return gross - invest;
}

double L_value(const LedgerMarket& market, int miner, double z) {
    market.validate();
    if (!market.symmetric() || market.block_reward != 0.0)
        throw std::domain_error("L_value: defined for the symmetric zero-reward model");
    if (z <= 0.0 || z > 1.0) throw std::domain_error("L_value: z must lie in (0, 1]");

    const double p0 = market.saturation_price();
    const double reward = market.append_supply * (p0 - market.write_cost);
    const double xi = c_star(market.resource_costs).shares[miner];
    if (z == 1.0) return reward * xi * xi;
    double k = cover_function(market.curve, market.append_supply, market.write_cost, z);
    double one_m = 1.0 - xi;
    return reward * (k - 2.0 * one_m * std::sqrt(k / z) + one_m * one_m);
}

RegularSufficiency sufficiency_regular(const LedgerMarket& market) {
    market.validate();
    if (!check_regular(market.curve, 64))
        throw std::domain_error("sufficiency_regular: demand curve is not regular");
    if (!market.symmetric() && market.block_reward != 0.0)
        throw std::domain_error("sufficiency_regular: asymmetric variant requires zero block reward");

    RegularSufficiency out;
    ContestShares cs = market.symmetric() ? c_star(market.resource_costs)
                                          : market.shares_at(market.saturation_price());
    out.x_max = *std::max_element(cs.shares.begin(), cs.shares.end());
    double ratio = market.curve.mass_at_zero() / market.append_supply - 1.0;
    if (ratio <= 0.0) {
        out.degenerate = true;
        out.bound = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.bound = 1.0 - 1.0 / ratio;
    out.holds = out.x_max <= out.bound + kTol;
    return out;
}

ThresholdSufficiency sufficiency_threshold(const LedgerMarket& market) {
    market.validate();
    if (!market.symmetric() && market.block_reward != 0.0)
        throw std::domain_error("sufficiency_threshold: asymmetric variant requires zero block reward");
    const int n = market.miners();
    const double p0 = market.saturation_price();
    ContestShares cs =
        market.symmetric() ? c_star(market.resource_costs) : market.shares_at(p0);

    ThresholdSufficiency out;
    out.per_miner.resize(n);
    if (market.symmetric()) {
        SupResult s = sup_cover_ratio(market.curve, market.append_supply, market.write_cost);
        out.sup_ratio = s.sup;
        out.arg_z = s.arg;
        for (int i = 0; i < n; ++i)
            out.per_miner[i] = cs.shares[i] <= 1.0 - s.sup + 1e-9;
    } else {
        out.sup_ratio = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            SupResult s = sup_cover_ratio(market.curve, market.append_supply, market.write_cost_of(i));
            out.per_miner[i] = cs.shares[i] <= 1.0 - s.sup + 1e-9;
            if (s.sup > out.sup_ratio) {
                out.sup_ratio = s.sup;
                out.arg_z = s.arg;
            }
        }
    }
    out.all_pass = std::all_of(out.per_miner.begin(), out.per_miner.end(), [](bool b) { return b; });
    return out;
}

EquilibriumCandidate block_reward_rescale(const LedgerMarket& market,
                                          const EquilibriumCandidate& candidate,
                                          double new_reward) {
    if (!market.symmetric())
        throw std::domain_error("block_reward_rescale: defined for symmetric write costs only");
    if (new_reward < market.block_reward)
        throw std::invalid_argument("block_reward_rescale: new reward must not be smaller");
    double denom = candidate.clearing_price + market.block_reward - market.write_cost;
    if (denom <= 0.0)
        throw std::domain_error("block_reward_rescale: degenerate per-append reward");
    double factor = (candidate.clearing_price + new_reward - market.write_cost) / denom;

    EquilibriumCandidate scaled = candidate;
    for (double& q : scaled.investments) q *= factor;
    LedgerMarket boosted = market;
    boosted.block_reward = new_reward;
    fill_payoffs(boosted, scaled);
    return scaled;
}

BlockRewardBound min_block_reward(const LedgerMarket& market) {
    market.validate();
    const double p0 = market.saturation_price();
    const double q_a = market.append_supply;

    BlockRewardBound out;
    if (market.symmetric()) {
        double threshold = inf_undercut_ratio(market.curve, market.write_cost, q_a, p0);
        ContestShares cs = c_star(market.resource_costs);
        double x_max = *std::max_element(cs.shares.begin(), cs.shares.end());
        out.gap = threshold - q_a * x_max;
        if (out.gap <= 1e-12)
            throw std::domain_error("min_block_reward: no strict gap, no finite reward suffices");
        double x_rev = max_revenue_by_quantity(market.curve, market.write_cost, q_a).value;
        out.bound = 2.0 * x_rev / (out.gap * out.gap);
        return out;
    }

    // per-miner bound from the asymmetric deviation-loss inequality, then a
    // doubling search until the reward-dependent shares sit strictly inside
    // the gap as well
    const int n = market.miners();
    ContestShares base = c_star(market.resource_costs);
    std::vector<double> thresholds(n);
    out.gap = std::numeric_limits<double>::infinity();
    double bound = 0.0;
    for (int i = 0; i < n; ++i) {
        double cw = market.write_cost_of(i);
        thresholds[i] = inf_undercut_ratio(market.curve, cw, q_a, p0);
        double gap_i = thresholds[i] - q_a * base.shares[i];
        if (gap_i <= 1e-12)
            throw std::domain_error("min_block_reward: no strict gap, no finite reward suffices");
        out.gap = std::min(out.gap, gap_i);
        double x_rev = max_revenue_by_quantity(market.curve, cw, q_a).value;
        bound = std::max(bound, 2.0 * x_rev / (gap_i * gap_i * q_a) + cw - p0);
    }
    bound = std::max(bound, 0.0);

    double b_conv = std::max(bound, 1e-3);
    for (int it = 0; it < 60; ++it) {
        LedgerMarket probe = market;
        probe.block_reward = b_conv;
        ContestShares cs = probe.shares_at(p0);
        bool ok = true;
        for (int i = 0; i < n; ++i)
            ok = ok && q_a * cs.shares[i] < thresholds[i];
        if (ok) {
            out.bound = std::max(bound, b_conv);
            return out;
        }
        b_conv *= 2.0;
    }
    throw std::runtime_error("min_block_reward: share convergence search did not terminate");
}

}  // namespace blockmkt
