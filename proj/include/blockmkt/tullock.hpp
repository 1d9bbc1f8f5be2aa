#pragma once

#include <vector>

namespace blockmkt {

/// Critical cost level and equilibrium market shares of a proportional
/// contest. c_star solves sum_i max{0, 1 - cost_i / c} = 1; the shares are
/// the bracketed terms at the solution.
struct ContestShares {
    double c_star;
    std::vector<double> shares;
};

/// Symmetric-prize contest. Requires n >= 2 and strictly positive costs;
/// solved by bisection to a defining-equation residual below 1e-12.
ContestShares c_star(const std::vector<double>& resource_costs);

/// Contest where miner i's per-append prize is (reference_price + block_reward
/// - write_cost_i). Miners with a non-positive prize are excluded before
/// solving; at least two viable miners are required. Excluded miners get
/// share 0.
ContestShares c_star_asym(const std::vector<double>& resource_costs,
                          const std::vector<double>& write_costs,
                          double block_reward, double reference_price);

/// Lower bound on the payoff lost by investing an extra z*Y/c_star beyond the
/// contest equilibrium: z^2/(1+z) * Y * cost_ratio.
double investment_loss_bound(double total_reward, double cost_ratio, double z);

/// Lower bound on the payoff lost by pushing one's share up by w: w^2 * Y / 2.
double share_increase_loss_bound(double total_reward, double w);

}  // namespace blockmkt
