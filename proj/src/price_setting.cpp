#include "blockmkt/price_setting.hpp"

#include <cmath>
#include <stdexcept>

namespace blockmkt {

namespace {

constexpr double kTol = 1e-12;

void validate(const PriceSettingInstance& inst) {
    if (inst.quantities.size() != inst.unit_costs.size())
        throw std::invalid_argument("price_setting: quantity/cost vectors differ in length");
    if (inst.quantities.empty()) throw std::invalid_argument("price_setting: no sellers");
    for (double q : inst.quantities)
        if (q < 0.0) throw std::domain_error("price_setting: negative quantity");
}

}  // namespace

double PriceSettingInstance::total_quantity() const {
    double q = 0.0;
    for (double v : quantities) q += v;
    return q;
}

double PriceSettingInstance::saturation_price() const {
    return inverse_sup(curve, total_quantity());
}

double saturated_threshold(const PriceSettingInstance& inst, int seller) {
    validate(inst);
    double total = inst.total_quantity();
    if (!(total > 0.0)) throw std::domain_error("saturated_threshold: total quantity must be positive");
    if (total > inst.curve.mass_at_zero() + kTol)
        throw std::domain_error("saturated_threshold: quantity exceeds D(0)");
    return inf_undercut_ratio(inst.curve, inst.unit_costs[seller], total,
                              inst.saturation_price());
}

std::optional<PriceEquilibrium> saturated_equilibrium(const PriceSettingInstance& inst) {
    validate(inst);
    const double p0 = inst.saturation_price();
    const size_t n = inst.quantities.size();
    for (size_t i = 0; i < n; ++i) {
        if (inst.quantities[i] == 0.0) continue;  // nothing to sell, nothing to gain
        if (inst.quantities[i] > saturated_threshold(inst, static_cast<int>(i)) + kTol)
            return std::nullopt;
    }
    PriceEquilibrium eq;
    eq.kind = PriceEquilibriumKind::Saturated;
    eq.reserves.assign(n, p0);
    eq.clearing_price = p0;
    eq.payoffs.resize(n);
    for (size_t i = 0; i < n; ++i)
        eq.payoffs[i] = inst.quantities[i] * (p0 - inst.unit_costs[i]);
    return eq;
}

PricePoint price_setter_optimum(const PriceSettingInstance& inst, int seller) {
    validate(inst);
    if (!(inst.quantities[seller] > 0.0))
        throw std::domain_error("price_setter_optimum: seller holds no inventory");
    const double p0 = inst.saturation_price();
    double offset = inst.quantities[seller] - inst.total_quantity();
    PricePoint best = max_margin_times_residual(inst.curve, inst.unit_costs[seller], offset,
                                                p0, inst.curve.v_max());
    if (best.value < 0.0) best.value = 0.0;
    return best;
}

std::vector<PriceEquilibrium> enumerate_equilibria(const PriceSettingInstance& inst) {
    validate(inst);
    std::vector<PriceEquilibrium> out;
    if (auto sat = saturated_equilibrium(inst)) out.push_back(*sat);

    const double p0 = inst.saturation_price();
    const double total = inst.total_quantity();
    const size_t n = inst.quantities.size();
    for (size_t i = 0; i < n; ++i) {
        if (!(inst.quantities[i] > 0.0)) continue;
        PricePoint opt = price_setter_optimum(inst, static_cast<int>(i));
        double residual = eval(inst.curve, opt.price) + inst.quantities[i] - total;
        if (opt.price <= p0 + kTol) continue;        // degenerate, folds into saturation
        if (opt.price <= inst.unit_costs[i]) continue;  // not a price-setter by definition
        if (residual <= kTol || opt.value <= kTol) continue;

        // setter's own optimality: price-setting must beat joining the
        // saturated pool at p0
        if (opt.value + kTol < inst.quantities[i] * (p0 - inst.unit_costs[i])) continue;

        // every rival must prefer selling out at opt.price over overcutting
        bool stable = true;
        for (size_t j = 0; j < n && stable; ++j) {
            if (j == i || inst.quantities[j] == 0.0) continue;
            double stay = inst.quantities[j] * (opt.price - inst.unit_costs[j]);
            PricePoint over = max_margin_times_residual(
                inst.curve, inst.unit_costs[j], inst.quantities[j] - total,
                opt.price, inst.curve.v_max(), /*open_left=*/true);
            if (std::max(0.0, over.value) > stay + kTol) stable = false;
        }
        if (!stable) continue;

        PriceEquilibrium eq;
        eq.kind = PriceEquilibriumKind::PriceSetter;
        eq.price_setter = static_cast<int>(i);
        eq.reserves.assign(n, 0.0);
        eq.reserves[i] = opt.price;
        eq.clearing_price = opt.price;
        eq.payoffs.resize(n);
        for (size_t j = 0; j < n; ++j) {
            eq.payoffs[j] = (j == i) ? opt.value
                                     : inst.quantities[j] * (opt.price - inst.unit_costs[j]);
        }
        out.push_back(eq);
    }
    return out;
}

}  // namespace blockmkt
