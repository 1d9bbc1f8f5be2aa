#include "blockmkt/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace blockmkt {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
    throw InputError("scenario: field '" + field + "': " + what);
}

double need_number(const json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_number()) bad(field, "missing or not a number");
    return j[field].get<double>();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("scenario: invalid JSON: ") + e.what());
    }

    Scenario sc;
    if (!j.contains("demand") || !j["demand"].contains("points") ||
        !j["demand"]["points"].is_array())
        bad("demand.points", "missing list of [price, mass] pairs");
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j["demand"]["points"]) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            bad("demand.points", "each entry must be a [price, mass] pair");
        pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    try {
        sc.market.curve = DemandCurve::from_points(std::move(pts));
    } catch (const std::exception& e) {
        bad("demand.points", e.what());
    }

    if (!j.contains("protocol")) bad("protocol", "missing");
    sc.market.append_supply = need_number(j["protocol"], "append_supply");
    sc.market.block_reward = need_number(j["protocol"], "block_reward");

    double default_write = 0.0;
    if (j.contains("market")) default_write = need_number(j["market"], "write_cost");
    sc.market.write_cost = default_write;

    if (!j.contains("miners") || !j["miners"].is_array() || j["miners"].size() < 2)
        bad("miners", "need a list of at least two miners");
    bool any_asym = false;
    std::vector<double> wcosts;
    for (const auto& m : j["miners"]) {
        sc.market.resource_costs.push_back(need_number(m, "resource_cost"));
        if (m.contains("write_cost")) {
            any_asym = true;
            wcosts.push_back(m["write_cost"].get<double>());
        } else {
            wcosts.push_back(default_write);
        }
    }
    if (any_asym) sc.market.write_costs = std::move(wcosts);

    if (j.contains("solver")) {
        const auto& s = j["solver"];
        if (s.contains("grid_q")) sc.grid.q_points = s["grid_q"].get<int>();
        if (s.contains("grid_r")) sc.grid.r_points = s["grid_r"].get<int>();
        if (s.contains("tolerance")) sc.grid.tolerance = s["tolerance"].get<double>();
        if (s.contains("q_max_multiplier")) sc.grid.q_max_multiplier = s["q_max_multiplier"].get<double>();
        if (s.contains("damping")) sc.damping = s["damping"].get<double>();
    }

    try {
        sc.market.validate();
    } catch (const std::exception& e) {
        throw InputError(std::string("scenario: ") + e.what());
    }
    return sc;
}

std::string scenario_to_json(const Scenario& sc) {
    json j;
    for (const auto& [p, m] : sc.market.curve.points())
        j["demand"]["points"].push_back(json::array({p, m}));
    j["protocol"]["append_supply"] = sc.market.append_supply;
    j["protocol"]["block_reward"] = sc.market.block_reward;
    j["market"]["write_cost"] = sc.market.write_cost;
    for (int i = 0; i < sc.market.miners(); ++i) {
        json m;
        m["resource_cost"] = sc.market.resource_costs[i];
        if (sc.market.write_costs) m["write_cost"] = (*sc.market.write_costs)[i];
        j["miners"].push_back(m);
    }
    j["solver"]["grid_q"] = sc.grid.q_points;
    j["solver"]["grid_r"] = sc.grid.r_points;
    j["solver"]["tolerance"] = sc.grid.tolerance;
    j["solver"]["q_max_multiplier"] = sc.grid.q_max_multiplier;
    j["solver"]["damping"] = sc.damping;
    return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) { return parse_scenario(slurp(path)); }

void save_scenario(const Scenario& sc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << scenario_to_json(sc);
}

StrategyProfile load_profile(const std::string& path, int miners) {
    json j;
    try {
        j = json::parse(slurp(path));
    } catch (const json::parse_error& e) {
        throw InputError(std::string("profile: invalid JSON: ") + e.what());
    }
    StrategyProfile prof;
    if (!j.contains("investments") || !j.contains("reserves"))
        throw InputError("profile: need 'investments' and 'reserves' arrays");
    for (const auto& v : j["investments"]) prof.investments.push_back(v.get<double>());
    for (const auto& v : j["reserves"]) prof.reserves.push_back(v.get<double>());
    if (static_cast<int>(prof.investments.size()) != miners ||
        static_cast<int>(prof.reserves.size()) != miners)
        throw InputError("profile: vector lengths do not match the miner count");
    return prof;
}

Scenario builtin_scenario(const std::string& name) {
    auto linear_unit = [] { return DemandCurve::from_points({{0.0, 1.0}, {1.0, 0.0}}); };

    Scenario sc;
    if (name == "example-5-3-1") {
        sc.market.curve = linear_unit();
        sc.market.append_supply = 1.0;
        sc.market.resource_costs = {1.0, 1.0, 1.0};
        return sc;
    }
    if (name == "qa-0.75-n3") {
        sc.market.curve = linear_unit();
        sc.market.append_supply = 0.75;
        sc.market.resource_costs = {1.0, 1.0, 1.0};
        return sc;
    }
    if (name == "min-blockreward-demo") {
        sc.market.curve = linear_unit();
        sc.market.append_supply = 0.5;
        sc.market.resource_costs = {1.0, 1.0, 1.0};
        return sc;
    }
    if (name.rfind("tightness-delta", 0) == 0) {
        double delta = 0.25;
        auto colon = name.find(':');
        if (colon != std::string::npos) delta = std::stod(name.substr(colon + 1));
        if (!(delta > 0.0 && delta < 1.0) || std::fabs(1.0 / delta - std::round(1.0 / delta)) > 1e-9)
            throw InputError("tightness-delta: 1/delta must be a whole miner count");
        int n = static_cast<int>(std::round(1.0 / delta));
        sc.market.curve =
            DemandCurve::from_points({{0.0, 1.0}, {delta, 1.0}, {1.0 + delta, 0.0}});
        sc.market.append_supply = 1.0;
        sc.market.resource_costs.assign(n, 1.0);
        return sc;
    }
    throw InputError("unknown built-in scenario '" + name + "'");
}

}  // namespace blockmkt
