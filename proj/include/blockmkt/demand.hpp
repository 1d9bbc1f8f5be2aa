#pragma once

#include <string>
#include <utility>
#include <vector>

namespace blockmkt {

/// A left-continuous, non-increasing piecewise-linear demand curve.
///
/// D(p) is the mass of buyers with value at least p. The curve is defined by
/// breakpoints (price, mass) with prices non-decreasing and masses
/// non-increasing; mass is interpolated linearly between adjacent breakpoints
/// and is 0 beyond the last one. A jump is encoded as two breakpoints sharing
/// a price: the first carries the left value, the second the right limit.
class DemandCurve {
public:
    // One maximal interval of prices on which D is linear and continuous.
    // Adjacent segments may disagree at the shared price; D takes the left
    // value there (left-continuity).
    struct Segment {
        double p_lo, p_hi;  // p_lo < p_hi
        double m_lo, m_hi;  // m_lo >= m_hi
        double slope() const { return (m_lo - m_hi) / (p_hi - p_lo); }
    };

    /// Builds a curve from raw breakpoints. The first price must be 0 and
    /// sup_p p*D(p) is finite by construction (D(0) finite, support bounded).
    /// Throws std::invalid_argument on malformed input.
    static DemandCurve from_points(std::vector<std::pair<double, double>> pts);

    const std::vector<std::pair<double, double>>& points() const { return points_; }
    const std::vector<Segment>& segments() const { return segments_; }
    double v_max() const { return v_max_; }
    double mass_at_zero() const { return points_.front().second; }

private:
    std::vector<std::pair<double, double>> points_;
    std::vector<Segment> segments_;
    double v_max_ = 0.0;
};

struct InverseInterval {
    double inf_price;
    double sup_price;
};

/// D(p); left-continuous, 0 above v_max. Throws std::domain_error for p < 0.
double eval(const DemandCurve& curve, double p);

/// lim_{q -> p+} D(q); right-continuous companion of eval.
double eval_right(const DemandCurve& curve, double p);

/// Generalized inverse {x | D+(x) <= y <= D(x)} as a closed interval.
/// Throws std::out_of_range for y > D(0).
InverseInterval inverse(const DemandCurve& curve, double y);
double inverse_inf(const DemandCurve& curve, double y);
double inverse_sup(const DemandCurve& curve, double y);

/// Virtual value x - D(x)/d(x). Defined only strictly inside a segment with
/// positive slope; throws std::domain_error at kinks and flat pieces.
double virtual_value(const DemandCurve& curve, double x);

struct RegularityResult {
    bool regular = true;
    double x_before = 0.0, x_after = 0.0;     // first violating pair, if any
    double phi_before = 0.0, phi_after = 0.0;
    std::string reason;
    explicit operator bool() const { return regular; }
};

/// Checks that the virtual value is non-decreasing: exact one-sided
/// comparisons at every kink plus a grid sweep inside segments. Jumps and
/// flat pieces disqualify the curve outright (d is 0 or undefined there).
RegularityResult check_regular(const DemandCurve& curve, int grid_size);

struct PricePoint {
    double price;
    double value;
};

/// argmax_{r in [lower_bound, v_max]} (r - unit_cost) * D(r), ties broken to
/// the smallest price; value clamped below at 0 (selling nothing is free).
/// Throws std::domain_error when lower_bound exceeds v_max.
PricePoint monopoly_revenue(const DemandCurve& curve, double unit_cost, double lower_bound);

/// sup_{0 <= q <= q_cap} q * (inverse_sup(q) - unit_cost), reported as
/// (maximizing quantity, value). Quantity-side twin of monopoly_revenue.
PricePoint max_revenue_by_quantity(const DemandCurve& curve, double unit_cost, double q_cap);

/// k(z) = (inverse_sup(z*Q) - unit_cost) * z*Q / ((inverse_sup(Q) - unit_cost) * Q)
/// for z in (0, 1]; k(1) = 1 exactly. Throws std::domain_error when the
/// denominator margin is not positive.
double cover_function(const DemandCurve& curve, double append_supply, double unit_cost, double z);

/// max_{x in [lo, hi]} (x - cost) * (D(x) + offset), smallest maximizer on
/// ties. With open_left the value at lo is taken as the right limit.
/// Evaluated in closed form on each segment.
PricePoint max_margin_times_residual(const DemandCurve& curve, double cost, double offset,
                                     double lo, double hi, bool open_left = false);

/// inf_{x > floor_price} (x - cost) * (supply - D(x)) / (x - floor_price),
/// with the x -> floor_price limit evaluated analytically. Requires
/// supply <= D(floor_price) so the numerator mass term is non-negative.
double inf_undercut_ratio(const DemandCurve& curve, double cost, double supply, double floor_price);

// Piecewise description of inverse_sup over mass: price(y) linear on
// [y_lo, y_hi] (constant pieces arise from demand jumps). Used by the
// mass-space sweeps in cover/sufficiency computations.
struct InverseSegment {
    double y_lo, y_hi;
    double p_at_ylo, p_at_yhi;  // p_at_ylo >= p_at_yhi
    double price_at(double y) const {
        if (y_hi == y_lo) return p_at_yhi;
        double t = (y - y_lo) / (y_hi - y_lo);
        return p_at_ylo + t * (p_at_yhi - p_at_ylo);
    }
};
std::vector<InverseSegment> inverse_segments(const DemandCurve& curve);

}  // namespace blockmkt
