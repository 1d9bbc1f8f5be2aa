#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blockmkt/clearing.hpp"
#include "blockmkt/model.hpp"
#include "blockmkt/oracle.hpp"
#include "blockmkt/price_setting.hpp"
#include "blockmkt/scenario.hpp"

using namespace blockmkt;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fmt_vec(const std::vector<double>& v) {
    std::string s = "[";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

void print_candidate(const char* label, const EquilibriumCandidate& c) {
    std::cout << label << ": price " << fmt(c.clearing_price);
    if (c.degenerate) std::cout << " (degenerate: zero per-append reward)";
    std::cout << "\n  investments " << fmt_vec(c.investments) << "\n  quantities  "
              << fmt_vec(c.quantities) << "\n  payoffs     " << fmt_vec(c.payoffs) << "\n";
}

void print_verdict(const Verdict& v) {
    std::cout << "  verdict: " << (v.is_equilibrium ? "equilibrium" : "NOT an equilibrium")
              << " (max gain " << fmt(v.max_gain) << ")\n";
    if (v.witness)
        std::cout << "  witness: miner " << v.witness->miner << " -> (q "
                  << fmt(v.witness->investment) << ", r " << fmt(v.witness->reserve)
                  << ") gains " << fmt(v.witness->gain) << "\n";
}

// the reserve game induced at the market-clearing quantities, whose threshold
// decides whether saturation survives deviations in reserves alone
PriceSettingInstance induced_reserve_game(const LedgerMarket& market) {
    PriceSettingInstance inst;
    ContestShares cs = market.shares_at(market.saturation_price());
    for (int i = 0; i < market.miners(); ++i) {
        inst.quantities.push_back(market.append_supply * cs.shares[i]);
        inst.unit_costs.push_back(market.write_cost_of(i));
    }
    inst.curve = market.curve;
    return inst;
}

int run_solve(const Scenario& sc) {
    const LedgerMarket& market = sc.market;
    const int n = market.miners();
    std::cout << "miners " << n << ", append supply " << fmt(market.append_supply)
              << ", block reward " << fmt(market.block_reward) << "\n";
    std::cout << "saturation price " << fmt(market.saturation_price()) << "\n";

    std::cout << "reserve caps: ";
    for (int i = 0; i < n; ++i) std::cout << (i ? ", " : "") << fmt(reserve_cap(market, i));
    std::cout << "\n";

    ContestShares cs = market.shares_at(market.saturation_price());
    std::cout << "contest c* " << fmt(cs.c_star) << ", shares " << fmt_vec(cs.shares) << "\n\n";

    EquilibriumCandidate mc = market_clearing_candidate(market);
    print_candidate("market-clearing candidate", mc);
    Verdict mc_verdict = verify_candidate(market, mc, sc.grid);
    print_verdict(mc_verdict);

    PriceSettingInstance game = induced_reserve_game(market);
    std::cout << "  saturated thresholds: ";
    for (int i = 0; i < n; ++i) std::cout << (i ? ", " : "") << fmt(saturated_threshold(game, i));
    std::cout << "\n\n";

    for (int i = 0; i < n; ++i) {
        EquilibriumCandidate ps = price_setter_candidate(market, i, sc.damping);
        std::string label = "price-setter candidate (miner " + std::to_string(i) + ")";
        print_candidate(label.c_str(), ps);
        print_verdict(verify_candidate(market, ps, sc.grid));
    }
    std::cout << "\n";

    try {
        RegularSufficiency reg = sufficiency_regular(market);
        std::cout << "regular-curve sufficiency: x_max " << fmt(reg.x_max) << " vs bound "
                  << fmt(reg.bound) << (reg.degenerate ? " (degenerate)" : "") << " -> "
                  << (reg.holds ? "holds" : "does not hold") << "\n";
    } catch (const std::domain_error& e) {
        std::cout << "regular-curve sufficiency: not applicable (" << e.what() << ")\n";
    }
    try {
        ThresholdSufficiency thr = sufficiency_threshold(market);
        std::cout << "exact threshold (zero-reward test): sup ratio " << fmt(thr.sup_ratio)
                  << " at z " << fmt(thr.arg_z) << "; per-miner";
        for (int i = 0; i < n; ++i)
            std::cout << (i ? "," : "") << " " << (thr.per_miner[i] ? "pass" : "fail");
        std::cout << " -> " << (thr.all_pass ? "all pass" : "fails") << "\n";
    } catch (const std::domain_error& e) {
        std::cout << "exact threshold (zero-reward test): not applicable (" << e.what() << ")\n";
    }
    return 0;
}

int run_verify(const Scenario& sc, const std::string& profile_path) {
    StrategyProfile prof = load_profile(profile_path, sc.market.miners());
    std::cout << "payoffs:";
    for (int i = 0; i < sc.market.miners(); ++i)
        std::cout << " " << fmt(profile_payoff(sc.market, prof, i));
    std::cout << "\n";
    print_verdict(verify_equilibrium(sc.market, prof, sc.grid));
    return 0;
}

struct SweepRow {
    double param_value;
    double clearing_price_mc;
    bool mc_exists;
    double best_ps_price;
    bool ps_exists_any;
    double max_oracle_gain;
    double c_star_value;
    double x_max;
};

SweepRow evaluate_market(const Scenario& sc, double param_value) {
    const LedgerMarket& market = sc.market;
    SweepRow row{};
    row.param_value = param_value;
    ContestShares cs = market.shares_at(market.saturation_price());
    row.c_star_value = cs.c_star;
    row.x_max = *std::max_element(cs.shares.begin(), cs.shares.end());

    EquilibriumCandidate mc = market_clearing_candidate(market);
    row.clearing_price_mc = mc.clearing_price;
    Verdict v = verify_candidate(market, mc, sc.grid);
    row.mc_exists = v.is_equilibrium;
    row.max_oracle_gain = v.max_gain;

    row.best_ps_price = 0.0;
    row.ps_exists_any = false;
    for (int i = 0; i < market.miners(); ++i) {
        EquilibriumCandidate ps = price_setter_candidate(market, i, sc.damping);
        row.best_ps_price = std::max(row.best_ps_price, ps.clearing_price);
        if (!row.ps_exists_any && verify_candidate(market, ps, sc.grid).is_equilibrium)
            row.ps_exists_any = true;
    }
    return row;
}

int run_sweep(Scenario sc, const std::string& builtin, const std::string& param,
              const std::vector<double>& values, const std::string& out_path) {
    std::ofstream out(out_path);
    if (!out) throw InputError("cannot write " + out_path);
    out << "param_value,clearing_price_mc,mc_exists,best_ps_price,ps_exists_any,"
           "max_oracle_gain,c_star,x_max\n";
    for (double v : values) {
        Scenario cur = sc;
        if (param == "protocol.append_supply") cur.market.append_supply = v;
        else if (param == "protocol.block_reward") cur.market.block_reward = v;
        else if (param == "market.write_cost") cur.market.write_cost = v;
        else if (param == "builtin.delta") {
            if (builtin.empty()) throw InputError("builtin.delta requires --builtin");
            cur = builtin_scenario(builtin + ":" + fmt(v));
            cur.grid = sc.grid;
        } else {
            throw InputError("unknown sweep parameter '" + param + "'");
        }
        cur.market.validate();
        SweepRow row = evaluate_market(cur, v);
        out << fmt(row.param_value) << ',' << fmt(row.clearing_price_mc) << ','
            << (row.mc_exists ? 1 : 0) << ',' << fmt(row.best_ps_price) << ','
            << (row.ps_exists_any ? 1 : 0) << ',' << fmt(row.max_oracle_gain) << ','
            << fmt(row.c_star_value) << ',' << fmt(row.x_max) << "\n";
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

struct Check {
    bool ok = true;
    void expect(bool cond, const std::string& what) {
        std::cout << "  [" << (cond ? "ok" : "MISMATCH") << "] " << what << "\n";
        ok = ok && cond;
    }
    void near(double got, double want, double tol, const std::string& what) {
        expect(std::fabs(got - want) <= tol, what + ": got " + fmt(got) + ", want " + fmt(want));
    }
};

int run_repro(const std::string& name, const GridConfig& grid) {
    Scenario sc = builtin_scenario(name);
    sc.grid = grid;
    const LedgerMarket& market = sc.market;
    Check chk;

    if (name == "example-5-3-1") {
        ContestShares cs = c_star(market.resource_costs);
        chk.near(cs.c_star, 1.5, 1e-12, "contest critical cost");
        EquilibriumCandidate ps = price_setter_candidate(market, 0);
        chk.near(ps.clearing_price, 1.0 / 6.0, 1e-9, "price-setter price");
        double sum_q = 0.0;
        for (double q : ps.investments) sum_q += q;
        chk.near(sum_q, 1.0 / 9.0, 1e-9, "total investment");
        chk.near(ps.investments[0], 1.0 / 27.0, 1e-9, "per-miner investment");
        SellerBook book;
        for (int i = 0; i < 3; ++i) book.offers.push_back({ps.quantities[i], ps.reserves[i], i});
        ClearingOutcome clr = canonical_clear(book, market.curve);
        chk.near(clr.sold[0] * clr.price, 1.0 / 36.0, 1e-9, "price-setter auction revenue");
        chk.near(ps.payoffs[0], -1.0 / 108.0, 1e-9, "price-setter payoff");
        PriceSettingInstance game = induced_reserve_game(market);
        chk.near(saturated_threshold(game, 0), 0.0, 1e-9, "saturated threshold");
        EquilibriumCandidate mc = market_clearing_candidate(market);
        chk.expect(!verify_candidate(market, mc, grid).is_equilibrium,
                   "market-clearing candidate rejected by search");
        Verdict v = verify_candidate(market, ps, grid);
        chk.expect(!v.is_equilibrium && v.max_gain >= 1.0 / 108.0 - grid.tolerance,
                   "price-setter candidate rejected with gain >= 1/108");
    } else if (name == "qa-0.75-n3") {
        ThresholdSufficiency thr = sufficiency_threshold(market);
        chk.near(thr.sup_ratio, 2.0 / 3.0, 1e-6, "threshold sup ratio");
        chk.expect(thr.all_pass, "threshold test passes for all miners");
        EquilibriumCandidate mc = market_clearing_candidate(market);
        chk.expect(verify_candidate(market, mc, grid).is_equilibrium,
                   "market-clearing candidate confirmed by search");
    } else if (name.rfind("tightness-delta", 0) == 0) {
        double delta = market.saturation_price();
        ContestShares cs = c_star(market.resource_costs);
        for (double s : cs.shares) chk.near(s, delta, 1e-9, "contest share");
        PriceSettingInstance game = induced_reserve_game(market);
        chk.near(saturated_threshold(game, 0), delta, 1e-9, "saturated threshold");
        EquilibriumCandidate mc = market_clearing_candidate(market);
        Verdict v = verify_candidate(market, mc, grid);
        std::cout << "  note: boundary family (threshold met with equality); search verdict below\n";
        print_verdict(v);
    } else if (name == "min-blockreward-demo") {
        BlockRewardBound bb = min_block_reward(market);
        chk.near(bb.bound, 4.5, 1e-9, "sufficient block reward");
        LedgerMarket boosted = market;
        boosted.block_reward = bb.bound;
        EquilibriumCandidate mc = market_clearing_candidate(boosted);
        chk.expect(verify_candidate(boosted, mc, grid).is_equilibrium,
                   "market-clearing candidate confirmed at the bound");
    } else {
        throw InputError("unknown repro name '" + name + "'");
    }
    std::cout << (chk.ok ? "repro OK" : "repro FAILED") << "\n";
    return chk.ok ? 0 : 1;
}

int run_oracle_check(const Scenario& sc) {
    EquilibriumCandidate mc = market_clearing_candidate(sc.market);
    GridConfig fine = sc.grid;
    fine.q_points *= 2;
    fine.r_points *= 2;
    Verdict coarse = verify_candidate(sc.market, mc, sc.grid);
    Verdict refined = verify_candidate(sc.market, mc, fine);
    std::cout << "grid " << sc.grid.q_points << "x" << sc.grid.r_points << ": "
              << (coarse.is_equilibrium ? "equilibrium" : "not equilibrium") << " (max gain "
              << fmt(coarse.max_gain) << ")\n";
    std::cout << "grid " << fine.q_points << "x" << fine.r_points << ": "
              << (refined.is_equilibrium ? "equilibrium" : "not equilibrium") << " (max gain "
              << fmt(refined.max_gain) << ")\n";
    std::cout << (coarse.is_equilibrium == refined.is_equilibrium
                      ? "verdict stable under refinement"
                      : "verdict UNSTABLE under refinement")
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blockspace market equilibrium toolkit"};
    app.require_subcommand(1);

    int grid_q = 512, grid_r = 512;
    double tol = 1e-7;
    app.add_option("--grid-q", grid_q, "investment grid points");
    app.add_option("--grid-r", grid_r, "reserve grid points");
    app.add_option("--tol", tol, "equilibrium tolerance on payoffs");

    std::string scenario_path, profile_path, out_path = "sweep.csv";
    std::string builtin_name, sweep_param, repro_name;
    std::vector<double> sweep_values;

    auto* solve = app.add_subcommand("solve", "build, test, and verify all candidates");
    solve->fallthrough();
    solve->add_option("scenario", scenario_path, "scenario file")->required();

    auto* verify = app.add_subcommand("verify", "verify an explicit profile");
    verify->fallthrough();
    verify->add_option("scenario", scenario_path, "scenario file")->required();
    verify->add_option("profile", profile_path, "profile file")->required();

    auto* sweep = app.add_subcommand("sweep", "sweep one parameter, write a CSV");
    sweep->fallthrough();
    sweep->add_option("scenario", scenario_path, "scenario file");
    sweep->add_option("--builtin", builtin_name, "built-in scenario family instead of a file");
    sweep->add_option("--param", sweep_param, "parameter path")->required();
    sweep->add_option("--values", sweep_values, "values to sweep")->required()->delimiter(',');
    sweep->add_option("--out", out_path, "output CSV path");

    auto* repro = app.add_subcommand("repro", "run a pinned built-in scenario and assert its numbers");
    repro->fallthrough();
    repro->add_option("name", repro_name, "built-in name")->required();

    auto* ocheck = app.add_subcommand("oracle-check", "grid-refinement stability report");
    ocheck->fallthrough();
    ocheck->add_option("scenario", scenario_path, "scenario file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        auto load = [&]() {
            Scenario sc = scenario_path.empty() ? builtin_scenario(builtin_name)
                                                : load_scenario(scenario_path);
            if (app.count("--grid-q")) sc.grid.q_points = grid_q;
            if (app.count("--grid-r")) sc.grid.r_points = grid_r;
            if (app.count("--tol")) sc.grid.tolerance = tol;
            return sc;
        };
        if (*solve) return run_solve(load());
        if (*verify) return run_verify(load(), profile_path);
        if (*sweep) {
            if (scenario_path.empty() && builtin_name.empty())
                throw InputError("sweep needs a scenario file or --builtin");
            return run_sweep(load(), builtin_name, sweep_param, sweep_values, out_path);
        }
        if (*repro) {
            GridConfig grid;
            grid.q_points = grid_q;
            grid.r_points = grid_r;
            grid.tolerance = tol;
            return run_repro(repro_name, grid);
        }
        if (*ocheck) return run_oracle_check(load());
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
