#include "blockmkt/tullock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blockmkt {

namespace {

// Solves sum_i max{0, 1 - e_i/x} = 1 for the effective cost vector e.
// The map is 0 at min(e), at least n-1 at n*max(e), and strictly increasing
// in between, so the root is bracketed from the start.
ContestShares solve_shares(const std::vector<double>& effective_costs) {
    const size_t n = effective_costs.size();
    auto residual = [&](double x) {
        double s = 0.0;
        for (double e : effective_costs) s += std::max(0.0, 1.0 - e / x);
        return s - 1.0;
    };
    double lo = *std::min_element(effective_costs.begin(), effective_costs.end());
    double hi = static_cast<double>(n) *
                *std::max_element(effective_costs.begin(), effective_costs.end());
    for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (residual(mid) < 0.0 ? lo : hi) = mid;
    }
    ContestShares out;
    out.c_star = 0.5 * (lo + hi);
    if (std::fabs(residual(out.c_star)) > 1e-12)
        throw std::runtime_error("c_star: bisection residual above tolerance");
    out.shares.reserve(n);
    for (double e : effective_costs) out.shares.push_back(std::max(0.0, 1.0 - e / out.c_star));
    return out;
}

}  // namespace

ContestShares c_star(const std::vector<double>& resource_costs) {
    if (resource_costs.size() < 2)
        throw std::domain_error("c_star: the contest equation needs at least two miners");
    for (double c : resource_costs)
        if (!(c > 0.0)) throw std::domain_error("c_star: resource costs must be positive");
    return solve_shares(resource_costs);
}

ContestShares c_star_asym(const std::vector<double>& resource_costs,
                          const std::vector<double>& write_costs,
                          double block_reward, double reference_price) {
    const size_t n = resource_costs.size();
    if (write_costs.size() != n)
        throw std::invalid_argument("c_star_asym: cost vectors differ in length");
    if (n < 2) throw std::domain_error("c_star_asym: need at least two miners");

    std::vector<double> effective;
    std::vector<size_t> viable;
    for (size_t i = 0; i < n; ++i) {
        if (!(resource_costs[i] > 0.0))
            throw std::domain_error("c_star_asym: resource costs must be positive");
        double prize = reference_price + block_reward - write_costs[i];
        if (prize > 0.0) {
            effective.push_back(resource_costs[i] / prize);
            viable.push_back(i);
        }
    }
    if (viable.size() < 2)
        throw std::domain_error("c_star_asym: fewer than two miners with positive prize");

    ContestShares inner = solve_shares(effective);
    ContestShares out;
    out.c_star = inner.c_star;
    out.shares.assign(n, 0.0);
    for (size_t k = 0; k < viable.size(); ++k) out.shares[viable[k]] = inner.shares[k];
    return out;
}

double investment_loss_bound(double total_reward, double cost_ratio, double z) {
    if (z < 0.0) throw std::domain_error("investment_loss_bound: z must be non-negative");
    if (!(total_reward > 0.0)) throw std::domain_error("investment_loss_bound: reward must be positive");
    return z * z / (1.0 + z) * total_reward * cost_ratio;
}

double share_increase_loss_bound(double total_reward, double w) {
    if (w < 0.0 || w > 1.0) throw std::domain_error("share_increase_loss_bound: w must lie in [0, 1]");
    if (!(total_reward > 0.0)) throw std::domain_error("share_increase_loss_bound: reward must be positive");
    return 0.5 * w * w * total_reward;
}

}  // namespace blockmkt
