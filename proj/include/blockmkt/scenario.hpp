#pragma once

#include <stdexcept>
#include <string>

#include "blockmkt/model.hpp"
#include "blockmkt/oracle.hpp"

namespace blockmkt {

/// Malformed scenario/profile input (exit code 1 at the CLI, as opposed to
/// numeric non-convergence which surfaces as std::runtime_error).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A market instance plus solver settings, as stored in a scenario file.
///
/// Schema (JSON):
///   demand.points        list of [price, mass] pairs, linear in between,
///                        mass 0 beyond the last pair
///   protocol             { append_supply, block_reward }
///   market               { write_cost } (symmetric default)
///   miners               [ { resource_cost, write_cost? } ]; any per-miner
///                        write_cost switches the instance to asymmetric costs
///   solver               { grid_q, grid_r, tolerance, damping } (optional)
struct Scenario {
    LedgerMarket market;
    GridConfig grid;
    double damping = 0.5;
};

Scenario parse_scenario(const std::string& json_text);
std::string scenario_to_json(const Scenario& sc);

/// Loads and validates a scenario file. Throws std::runtime_error with a
/// field-level message on malformed input.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);

/// Loads an explicit strategy profile: { "investments": [...], "reserves": [...] }.
StrategyProfile load_profile(const std::string& path, int miners);

/// Pinned built-in scenarios for the repro command. Known names:
/// example-5-3-1, qa-0.75-n3, tightness-delta[:d], min-blockreward-demo.
Scenario builtin_scenario(const std::string& name);

}  // namespace blockmkt
