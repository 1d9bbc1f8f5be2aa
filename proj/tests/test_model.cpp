#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "blockmkt/model.hpp"
#include "blockmkt/oracle.hpp"

using namespace blockmkt;

namespace {

DemandCurve unit_linear() { return DemandCurve::from_points({{0.0, 1.0}, {1.0, 0.0}}); }

DemandCurve tightness_curve(double delta) {
    return DemandCurve::from_points({{0.0, 1.0}, {delta, 1.0}, {1.0 + delta, 0.0}});
}

LedgerMarket linear_market(double q_a, int n, double block_reward = 0.0, double write_cost = 0.0) {
    LedgerMarket m;
    m.curve = unit_linear();
    m.append_supply = q_a;
    m.block_reward = block_reward;
    m.write_cost = write_cost;
    m.resource_costs.assign(n, 1.0);
    return m;
}

LedgerMarket tightness_market(double delta, double block_reward = 0.0) {
    LedgerMarket m;
    m.curve = tightness_curve(delta);
    m.append_supply = 1.0;
    m.block_reward = block_reward;
    m.resource_costs.assign(static_cast<int>(std::lround(1.0 / delta)), 1.0);
    return m;
}

double total(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("reserve caps") {
    auto m = linear_market(0.75, 3);
    CHECK(reserve_cap(m, 0) == doctest::Approx(0.5));

    auto scarce = linear_market(0.3, 3);
    CHECK(reserve_cap(scarce, 0) == doctest::Approx(0.7));  // the lower bound binds

    auto costly = linear_market(0.75, 3, 0.0, 1.0);  // write cost at the top value
    CHECK(reserve_cap(costly, 0) == doctest::Approx(1.0));
}

TEST_CASE("market-clearing candidate on pinned markets") {
    auto m = linear_market(0.75, 3);
    auto mc = market_clearing_candidate(m);
    CHECK(mc.clearing_price == doctest::Approx(0.25));
    CHECK(total(mc.investments) == doctest::Approx(0.125));
    for (double q : mc.investments) CHECK(q == doctest::Approx(1.0 / 24));
    for (double q : mc.quantities) CHECK(q == doctest::Approx(0.25));
    CHECK(!mc.degenerate);
    // payoff: quantity*price - investment = 1/16 - 1/24 = 1/48
    for (double p : mc.payoffs) CHECK(p == doctest::Approx(1.0 / 48));

    // full coverage at zero price: no reward at all, flagged
    auto degen = market_clearing_candidate(linear_market(1.0, 3));
    CHECK(degen.clearing_price == doctest::Approx(0.0));
    CHECK(total(degen.investments) == 0.0);
    CHECK(degen.degenerate);

    auto tight = market_clearing_candidate(tightness_market(0.25));
    CHECK(tight.clearing_price == doctest::Approx(0.25));
    CHECK(total(tight.investments) == doctest::Approx(3.0 / 16));
    for (double q : tight.investments) CHECK(q == doctest::Approx(0.25 * 3.0 / 16));
}

TEST_CASE("price-setter candidate on pinned markets") {
    auto m = linear_market(1.0, 3);
    auto ps = price_setter_candidate(m, 0);
    CHECK(ps.clearing_price == doctest::Approx(1.0 / 6));
    CHECK(total(ps.investments) == doctest::Approx(1.0 / 9));
    for (double q : ps.investments) CHECK(q == doctest::Approx(1.0 / 27));
    CHECK(ps.payoffs[0] == doctest::Approx(-1.0 / 108));
    CHECK(ps.payoffs[1] == doctest::Approx(1.0 / 54));

    // residual vertex sits below the floor: the argmax pins to the boundary
    auto boundary = price_setter_candidate(linear_market(0.75, 3), 0);
    CHECK(boundary.clearing_price == doctest::Approx(0.25));

    // near-monopolist share: the candidate price approaches the monopoly price
    LedgerMarket mono = linear_market(0.75, 2);
    mono.resource_costs = {1.0, 1e9};
    auto big = price_setter_candidate(mono, 0);
    CHECK(big.clearing_price == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("closed-form deviation surface matches the exact payoff evaluator") {
    auto m = linear_market(0.75, 3);
    auto mc = market_clearing_candidate(m);
    double x_star = 1.0 / 3;

    // the equilibrium point of the surface reproduces the candidate payoff
    double at_eq = deviation_payoff_yz(m, 0, 1.0 - x_star, 1.0);
    CHECK(at_eq == doctest::Approx(mc.payoffs[0]).epsilon(1e-9));

    // a mid-surface point agrees with the exact evaluator: winning a (1-y)
    // share and pricing at the z-quantile is a concrete strategy
    double y = 0.5, z = 0.8;
    double q_others = total(mc.investments) * (1.0 - x_star);
    StrategyProfile prof = {mc.investments, mc.reserves};
    prof.investments[0] = q_others * (1.0 - y) / y;  // rivals end up with share y
    prof.reserves[0] = inverse_sup(m.curve, z * m.append_supply);
    CHECK(deviation_payoff_yz(m, 0, y, z) ==
          doctest::Approx(profile_payoff(m, prof, 0)).epsilon(1e-9));

    // selling nothing still pays the investment
    CHECK(deviation_payoff_yz(m, 0, 0.4, 0.4) < 0.0);

    CHECK_THROWS_AS(deviation_payoff_yz(m, 0, 0.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(deviation_payoff_yz(linear_market(0.75, 3, 1.0), 0, 0.5, 0.5),
                    std::domain_error);
}

TEST_CASE("L envelope dominates the surface and pins the optimal y") {
    auto m = linear_market(0.75, 3);
    double x_star = 1.0 / 3;
    double reward = 0.75 * 0.25;

    CHECK(L_value(m, 0, 1.0) == doctest::Approx(reward * x_star * x_star));

    double z = 2.0 / 3.0;
    double k = cover_function(m.curve, 0.75, 0.0, z);
    CHECK(k == doctest::Approx(4.0 / 3.0));
    double envelope = L_value(m, 0, z);
    double best_y = -1.0, best_v = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 4000; ++i) {
        double y = z * i / 4000.0;
        double v = deviation_payoff_yz(m, 0, y, z);
        if (v > best_v) {
            best_v = v;
            best_y = y;
        }
    }
    CHECK(envelope >= best_v - 1e-9);
    CHECK(best_y == doctest::Approx((1.0 - x_star) * std::sqrt(z / k)).epsilon(1e-3));
}

TEST_CASE("regular-curve sufficiency bound") {
    auto ok = sufficiency_regular(linear_market(1.0 / 3, 3));
    CHECK(ok.holds);
    CHECK(ok.bound == doctest::Approx(0.5));

    auto fail = sufficiency_regular(linear_market(0.5, 2));
    CHECK(!fail.holds);
    CHECK(fail.bound == doctest::Approx(0.0));

    // degenerate: supply covers all demand
    auto degen = sufficiency_regular(linear_market(1.0, 3));
    CHECK(degen.degenerate);
    CHECK(!degen.holds);

    // the test demands a regular curve
    LedgerMarket jumpy = linear_market(0.5, 3);
    jumpy.curve = DemandCurve::from_points({{0.0, 1.0}, {0.5, 0.8}, {0.5, 0.4}, {1.0, 0.0}});
    CHECK_THROWS_AS(sufficiency_regular(jumpy), std::domain_error);
}

TEST_CASE("exact threshold test on the pinned markets") {
    auto thr = sufficiency_threshold(linear_market(0.75, 3));
    CHECK(thr.sup_ratio == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(thr.all_pass);  // shares 1/3 meet the bound with equality

    LedgerMarket mono = linear_market(0.75, 2);
    mono.resource_costs = {1.0, 1e9};
    auto fat = sufficiency_threshold(mono);
    CHECK(!fat.per_miner[0]);  // near-monopolist share fails
    CHECK(fat.per_miner[1]);

    // flat-top family: sup ratio 1 - delta, shares delta, boundary equality
    auto tight = sufficiency_threshold(tightness_market(0.25));
    CHECK(tight.sup_ratio == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(tight.all_pass);
}

TEST_CASE("block-reward rescaling preserves the candidate structure") {
    auto m = linear_market(0.75, 3);
    auto mc = market_clearing_candidate(m);

    auto same = block_reward_rescale(m, mc, 0.0);
    for (int i = 0; i < 3; ++i) CHECK(same.investments[i] == doctest::Approx(mc.investments[i]));

    auto boosted = block_reward_rescale(m, mc, 1.0);
    CHECK(total(boosted.investments) == doctest::Approx(0.75 * 1.25 / 1.5));  // = 5/8
    CHECK(boosted.clearing_price == mc.clearing_price);

    // the scaled profile matches the candidate built directly at the new reward
    LedgerMarket m2 = m;
    m2.block_reward = 1.0;
    auto direct = market_clearing_candidate(m2);
    for (int i = 0; i < 3; ++i)
        CHECK(boosted.investments[i] == doctest::Approx(direct.investments[i]).epsilon(1e-12));

    CHECK_THROWS_AS(block_reward_rescale(m, mc, -1.0), std::invalid_argument);
    auto degen = market_clearing_candidate(linear_market(1.0, 3));
    CHECK_THROWS_AS(block_reward_rescale(linear_market(1.0, 3), degen, 1.0), std::domain_error);
}

TEST_CASE("candidates do not move with the block reward") {
    std::mt19937 rng(59);
    for (int trial = 0; trial < 30; ++trial) {
        double q_a = std::uniform_real_distribution<>(0.2, 0.7)(rng);
        int n = std::uniform_int_distribution<>(2, 5)(rng);
        LedgerMarket base = linear_market(q_a, n);
        for (int i = 0; i < n; ++i)
            base.resource_costs[i] = std::uniform_real_distribution<>(0.5, 2.0)(rng);

        auto mc0 = market_clearing_candidate(base);
        auto ps0 = price_setter_candidate(base, 0);
        for (double b : {1.0, 10.0}) {
            LedgerMarket m = base;
            m.block_reward = b;
            auto mc = market_clearing_candidate(m);
            auto ps = price_setter_candidate(m, 0);
            CHECK(std::fabs(mc.clearing_price - mc0.clearing_price) <= 1e-12);
            CHECK(std::fabs(ps.clearing_price - ps0.clearing_price) <= 1e-12);
            double ratio = (mc.clearing_price + b - 0.0) / (mc.clearing_price - 0.0);
            CHECK(total(mc.investments) ==
                  doctest::Approx(total(mc0.investments) * ratio).epsilon(1e-12));
            for (int i = 0; i < n; ++i) {
                double s0 = mc0.investments[i] / total(mc0.investments);
                double s = mc.investments[i] / total(mc.investments);
                CHECK(std::fabs(s - s0) <= 1e-12);
            }
        }
    }
}

TEST_CASE("minimum block reward: bound, blow-ups, and the flat-top family") {
    auto demo = min_block_reward(linear_market(0.5, 3));
    CHECK(demo.bound == doctest::Approx(4.5).epsilon(1e-9));
    CHECK(demo.gap == doctest::Approx(1.0 / 3));

    // gap exactly zero: threshold delta equals the largest append quantity
    CHECK_THROWS_AS(min_block_reward(tightness_market(0.25)), std::domain_error);
    // full coverage at zero price: threshold 0 below quantity 1/3
    CHECK_THROWS_AS(min_block_reward(linear_market(1.0, 3)), std::domain_error);
}

TEST_CASE("asymmetric write costs: candidates and bounds stay coherent") {
    LedgerMarket m = linear_market(0.5, 3);
    m.write_costs = std::vector<double>{0.0, 0.05, 0.1};

    auto mc = market_clearing_candidate(m);
    CHECK(mc.clearing_price == doctest::Approx(0.5));
    // lower write cost buys a larger share
    CHECK(mc.quantities[0] > mc.quantities[1]);
    CHECK(mc.quantities[1] > mc.quantities[2]);
    CHECK(total(mc.quantities) == doctest::Approx(0.5).epsilon(1e-9));

    auto bound = min_block_reward(m);
    CHECK(bound.bound > 0.0);
    LedgerMarket boosted = m;
    boosted.block_reward = bound.bound;
    ContestShares far = boosted.shares_at(0.5);
    ContestShares flat = c_star(m.resource_costs);
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(far.shares[i] - flat.shares[i]) < 0.2);
}

TEST_CASE("asymmetric price-setter: the damped fixed point lands on its equations") {
    // generous supply so the residual optimum sits strictly above the floor
    LedgerMarket m = linear_market(0.9, 2);
    m.write_costs = std::vector<double>{0.0, 0.05};
    const double p0 = m.saturation_price();
    CHECK(p0 == doctest::Approx(0.1));

    auto ps = price_setter_candidate(m, 0);
    CHECK(ps.clearing_price > p0 + 1e-6);
    ContestShares cs = m.shares_at(ps.clearing_price);
    double offset = m.append_supply * (cs.shares[0] - 1.0);
    auto re_opt = max_margin_times_residual(m.curve, 0.0, offset, p0, m.curve.v_max());
    CHECK(re_opt.price == doctest::Approx(ps.clearing_price).epsilon(1e-6));

    // floor-pinned case: residual vertex below the floor keeps the price there
    LedgerMarket scarce = linear_market(0.5, 3);
    scarce.write_costs = std::vector<double>{0.0, 0.05, 0.1};
    CHECK(price_setter_candidate(scarce, 0).clearing_price == doctest::Approx(0.5));
}


TEST_CASE("exact threshold verdict agrees with the search off the boundary") {
    std::mt19937 rng(83);
    GridConfig grid;
    grid.q_points = 128;
    grid.r_points = 128;
    int agree_pass = 0, agree_fail = 0;
    while (agree_pass < 12 || agree_fail < 12) {
        LedgerMarket m;
        // fresh random market with a workable margin
        {
            std::uniform_real_distribution<> mass(0.6, 1.5);
            std::uniform_real_distribution<> width(0.25, 0.8);
            int k = std::uniform_int_distribution<>(1, 3)(rng);
            std::vector<std::pair<double, double>> pts{{0.0, mass(rng)}};
            double p = 0.0;
            for (int i = 0; i < k; ++i) {
                p += width(rng);
                double nm = (i + 1 == k) ? 0.0
                                         : pts.back().second *
                                               std::uniform_real_distribution<>(0.35, 0.9)(rng);
                pts.push_back({p, nm});
            }
            m.curve = DemandCurve::from_points(pts);
        }
        m.append_supply =
            std::uniform_real_distribution<>(0.3, 0.85)(rng) * m.curve.mass_at_zero();
        if (m.saturation_price() < 0.08) continue;
        m.write_cost = std::uniform_real_distribution<>(0.0, 0.3)(rng) * m.saturation_price();
        int n = std::uniform_int_distribution<>(2, 5)(rng);
        m.resource_costs.resize(n);
        for (double& c : m.resource_costs) c = std::uniform_real_distribution<>(0.5, 2.5)(rng);

        ThresholdSufficiency thr = sufficiency_threshold(m);
        ContestShares cs = c_star(m.resource_costs);
        double x_max = *std::max_element(cs.shares.begin(), cs.shares.end());
        // a grid search cannot referee boundary ties; skip razor-thin margins
        if (std::fabs(x_max - (1.0 - thr.sup_ratio)) < 5e-3) continue;

        Verdict v = verify_candidate(m, market_clearing_candidate(m), grid);
        CHECK(thr.all_pass == v.is_equilibrium);
        (thr.all_pass ? agree_pass : agree_fail)++;
    }
}

TEST_CASE("profiles with shares far from the contest solution never verify") {
    std::mt19937 rng(89);
    GridConfig grid;
    grid.q_points = 128;
    grid.r_points = 128;
    int checked = 0;
    while (checked < 10) {
        double q_a = std::uniform_real_distribution<>(0.2, 0.45)(rng);
        int n = std::uniform_int_distribution<>(2, 4)(rng);
        LedgerMarket m = linear_market(q_a, n);
        for (double& c : m.resource_costs) c = std::uniform_real_distribution<>(0.6, 2.0)(rng);

        auto mc = market_clearing_candidate(m);
        if (!verify_candidate(m, mc, grid).is_equilibrium) continue;
        ++checked;

        // skew the investment split hard away from the contest shares
        StrategyProfile skew{mc.investments, mc.reserves};
        skew.investments[0] *= 2.5;
        CHECK(!verify_equilibrium(m, skew, grid).is_equilibrium);

        // scale everyone up: shares right, absolute investments wrong
        StrategyProfile heavy{mc.investments, mc.reserves};
        for (double& q : heavy.investments) q *= 3.0;
        CHECK(!verify_equilibrium(m, heavy, grid).is_equilibrium);
    }
}


TEST_CASE("asymmetric exact threshold agrees with the search off the boundary") {
    std::mt19937 rng(97);
    GridConfig grid;
    grid.q_points = 128;
    grid.r_points = 128;
    int agree_pass = 0, agree_fail = 0, guard = 0;
    while ((agree_pass < 8 || agree_fail < 8) && ++guard < 400) {
        LedgerMarket m = linear_market(std::uniform_real_distribution<>(0.35, 0.85)(rng),
                                       std::uniform_int_distribution<>(2, 4)(rng));
        for (double& c : m.resource_costs) c = std::uniform_real_distribution<>(0.6, 2.2)(rng);
        double p0 = m.saturation_price();
        if (p0 < 0.1) continue;
        std::vector<double> wc(m.miners());
        for (double& w : wc) w = std::uniform_real_distribution<>(0.0, 0.4)(rng) * p0;
        m.write_costs = wc;

        ThresholdSufficiency thr = sufficiency_threshold(m);
        ContestShares cs = m.shares_at(p0);
        // skip razor-thin margins the grid cannot referee (binding-sup proxy)
        double worst_margin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m.miners(); ++i)
            worst_margin = std::min(worst_margin,
                                    std::fabs(cs.shares[i] - (1.0 - thr.sup_ratio)));
        if (worst_margin < 5e-3) continue;

        Verdict v = verify_candidate(m, market_clearing_candidate(m), grid);
        CHECK(thr.all_pass == v.is_equilibrium);
        (thr.all_pass ? agree_pass : agree_fail)++;
    }
    CHECK(agree_pass >= 8);
    CHECK(agree_fail >= 8);
}

TEST_CASE("step demand runs through the whole pipeline") {
    // all buyers share one value: the inverse is a point mass and the cover
    // ratio has no interior constraint (k(z) = z everywhere)
    LedgerMarket m;
    m.curve = DemandCurve::from_points({{0.0, 1.0}, {1.0, 1.0}, {1.0, 0.0}});
    m.append_supply = 0.5;
    m.resource_costs = {1.0, 1.0, 1.0};

    CHECK(m.saturation_price() == doctest::Approx(1.0));
    auto mc = market_clearing_candidate(m);
    CHECK(mc.clearing_price == doctest::Approx(1.0));
    CHECK(total(mc.quantities) == doctest::Approx(0.5));

    ThresholdSufficiency thr = sufficiency_threshold(m);
    CHECK(thr.all_pass);  // no price above the plateau sells anything

    GridConfig grid;
    grid.q_points = 128;
    grid.r_points = 128;
    CHECK(verify_candidate(m, mc, grid).is_equilibrium);

    // the setter optimum cannot improve on the plateau price
    auto ps = price_setter_candidate(m, 0);
    CHECK(ps.clearing_price == doctest::Approx(1.0));
}

}  // TEST_SUITE
