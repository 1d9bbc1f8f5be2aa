#pragma once

#include <vector>

#include "blockmkt/demand.hpp"

namespace blockmkt {

struct SellerOffer {
    double quantity;
    double reserve;
    int seller_id;
};

struct SellerBook {
    std::vector<SellerOffer> offers;
    double total_quantity() const;
};

struct SupplyProfile {
    double at_most;  // total quantity offered at reserve <= b
    double below;    // total quantity offered at reserve <  b
    double exactly;  // at_most - below
};

SupplyProfile supply_profile(const SellerBook& book, double b);

struct ClearingBounds {
    double p_min;
    double p_max;
};

/// Feasible clearing prices of the bidding equilibrium:
///   p_min = inf { b | D+(b) <= Q<=(b) },  p_max = sup { b | D(b) >= Q<(b) }.
/// Both bounds are reported within [0, max(v_max, reserves)]; p_min <= p_max.
ClearingBounds clearing_bounds(const SellerBook& book, const DemandCurve& curve);

struct MassRange {
    double lo;
    double hi;
};

/// Feasible cleared mass at price p: [max{D+(p), Q<(p)}, min{D(p), Q<=(p)}].
/// Throws std::domain_error when p lies outside [p_min, p_max].
MassRange cleared_range(const SellerBook& book, const DemandCurve& curve, double p);

struct ClearingOutcome {
    double price;
    double total_cleared;
    std::vector<double> sold;  // aligned with book.offers
};

/// The canonical bidding outcome: minimal clearing price, maximal cleared
/// mass. Sellers below the price sell out, sellers above sell nothing, and
/// the residual at the price splits proportionally to quantity.
ClearingOutcome canonical_clear(const SellerBook& book, const DemandCurve& curve);

}  // namespace blockmkt
