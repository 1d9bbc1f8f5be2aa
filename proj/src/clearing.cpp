#include "blockmkt/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blockmkt {

namespace {

constexpr double kPriceTol = 1e-12;

// merged breakpoint grid: 0, every reserve, every demand breakpoint
std::vector<double> price_grid(const SellerBook& book, const DemandCurve& curve) {
    std::vector<double> xs;
    xs.push_back(0.0);
    for (const auto& o : book.offers) xs.push_back(o.reserve);
    for (const auto& [p, m] : curve.points()) xs.push_back(p);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

}  // namespace

double SellerBook::total_quantity() const {
    double q = 0.0;
    for (const auto& o : offers) q += o.quantity;
    return q;
}

SupplyProfile supply_profile(const SellerBook& book, double b) {
    if (b < 0.0) throw std::domain_error("supply_profile: negative price");
    SupplyProfile s{0.0, 0.0, 0.0};
    for (const auto& o : book.offers) {
        if (o.reserve <= b) s.at_most += o.quantity;
        if (o.reserve < b) s.below += o.quantity;
    }
    s.exactly = s.at_most - s.below;
    return s;
}

ClearingBounds clearing_bounds(const SellerBook& book, const DemandCurve& curve) {
    const auto xs = price_grid(book, curve);
    ClearingBounds out{xs.back(), xs.back()};

    // p_min: scan up; D+ falls, Q<= rises, both right-continuous, so the inf
    // is attained at a grid point or at an interior crossing of D+ with the
    // locally constant supply level.
    for (size_t k = 0; k < xs.size(); ++k) {
        double a = xs[k];
        double supply = supply_profile(book, a).at_most;
        if (eval_right(curve, a) <= supply) {
            out.p_min = a;
            break;
        }
        if (k + 1 < xs.size()) {
            double b = xs[k + 1];
            double da = eval_right(curve, a);
            double db = eval(curve, b);  // = limit of D+ from inside (a, b)
            if (db <= supply && da > db) {
                out.p_min = a + (da - supply) / (da - db) * (b - a);
                break;
            }
        }
    }

    // p_max: scan down; D and Q< are left-continuous, so the sup is attained.
    for (size_t k = xs.size(); k-- > 0;) {
        double b = xs[k];
        double supply = supply_profile(book, b).below;
        if (eval(curve, b) >= supply) {
            out.p_max = b;
            break;
        }
        if (k > 0) {
            double a = xs[k - 1];
            double da = eval_right(curve, a);  // limit of D from inside (a, b)
            double db = eval(curve, b);
            if (da >= supply && da > db) {
                out.p_max = a + (da - supply) / (da - db) * (b - a);
                break;
            }
        }
    }
    return out;
}

MassRange cleared_range(const SellerBook& book, const DemandCurve& curve, double p) {
    auto bounds = clearing_bounds(book, curve);
    if (p < bounds.p_min - kPriceTol || p > bounds.p_max + kPriceTol)
        throw std::domain_error("cleared_range: price outside the feasible clearing band");
    auto s = supply_profile(book, p);
    return {std::max(eval_right(curve, p), s.below), std::min(eval(curve, p), s.at_most)};
}

ClearingOutcome canonical_clear(const SellerBook& book, const DemandCurve& curve) {
    ClearingOutcome out;
    out.price = clearing_bounds(book, curve).p_min;
    auto s = supply_profile(book, out.price);
    out.total_cleared = std::min(eval(curve, out.price), s.at_most);
    out.sold.assign(book.offers.size(), 0.0);

    // classification must mirror supply_profile exactly so that sold sums
    // back to total_cleared
    double residual = std::max(0.0, out.total_cleared - s.below);
    double at_price = s.exactly;
    for (size_t i = 0; i < book.offers.size(); ++i) {
        const auto& o = book.offers[i];
        if (o.reserve < out.price) {
            out.sold[i] = o.quantity;
        } else if (o.reserve == out.price && at_price > 0.0) {
            out.sold[i] = residual * o.quantity / at_price;
        }
    }
    return out;
}

}  // namespace blockmkt
