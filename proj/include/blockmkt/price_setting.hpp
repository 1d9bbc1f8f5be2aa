#pragma once

#include <optional>
#include <vector>

#include "blockmkt/demand.hpp"

namespace blockmkt {

/// Reserve-setting game among sellers holding fixed inventories: each seller
/// picks a reserve, buyers clear canonically, and seller i earns
/// sold_i * (price - unit_cost_i).
struct PriceSettingInstance {
    std::vector<double> quantities;
    std::vector<double> unit_costs;
    DemandCurve curve;

    double total_quantity() const;
    /// D^{-1}_sup of the total quantity: the price at which everything clears.
    double saturation_price() const;
};

enum class PriceEquilibriumKind { Saturated, PriceSetter };

struct PriceEquilibrium {
    PriceEquilibriumKind kind;
    int price_setter = -1;  // seller index when kind == PriceSetter
    std::vector<double> reserves;
    double clearing_price = 0.0;
    std::vector<double> payoffs;
};

/// inf_{x > p0} (x - cost_i) * (Q - D(x)) / (x - p0) with p0 the saturation
/// price. A saturated equilibrium exists iff every seller's quantity stays
/// below this threshold (sellers with nothing to sell pass trivially).
double saturated_threshold(const PriceSettingInstance& inst, int seller);

/// The all-inventory-clears equilibrium at the saturation price, if the
/// threshold condition holds for every seller.
std::optional<PriceEquilibrium> saturated_equilibrium(const PriceSettingInstance& inst);

/// argmax_{x >= p0} (x - cost_i) * (D(x) + Q_i - Q): the best price seller i
/// can set as the lone unsaturated seller, with everyone else selling out
/// beneath them. Value clamped below at 0; ties break to the smallest price.
PricePoint price_setter_optimum(const PriceSettingInstance& inst, int seller);

/// All equilibria of the reserve game: the saturated one (if it exists) plus
/// every single-price-setter profile that survives both the setter's own
/// optimality and every rival's no-overcut condition.
std::vector<PriceEquilibrium> enumerate_equilibria(const PriceSettingInstance& inst);

}  // namespace blockmkt
