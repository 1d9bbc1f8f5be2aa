#include "blockmkt/demand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace blockmkt {

namespace {

constexpr double kMassTol = 1e-12;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument(where + ": " + what);
}

}  // namespace

DemandCurve DemandCurve::from_points(std::vector<std::pair<double, double>> pts) {
    if (pts.size() < 2) fail("DemandCurve", "need at least two breakpoints");
    for (auto& [p, m] : pts) {
        if (!std::isfinite(p) || !std::isfinite(m)) fail("DemandCurve", "non-finite breakpoint");
        if (p < 0.0 || m < 0.0) fail("DemandCurve", "negative price or mass");
    }
    if (pts.front().first != 0.0) fail("DemandCurve", "first breakpoint must sit at price 0");
    for (size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].first < pts[i - 1].first) fail("DemandCurve", "prices must be non-decreasing");
        if (pts[i].second > pts[i - 1].second + kMassTol)
            fail("DemandCurve", "masses must be non-increasing");
    }
    DemandCurve c;
    c.points_ = std::move(pts);
    c.v_max_ = c.points_.back().first;
    if (c.v_max_ <= 0.0) fail("DemandCurve", "support must extend above price 0");
    for (size_t i = 0; i + 1 < c.points_.size(); ++i) {
        const auto& [p0, m0] = c.points_[i];
        const auto& [p1, m1] = c.points_[i + 1];
        if (p1 > p0) c.segments_.push_back({p0, p1, m0, m1});
        // equal prices encode a jump; no segment
    }
    return c;
}

double eval(const DemandCurve& curve, double p) {
    if (p < 0.0) throw std::domain_error("eval: negative price");
    if (p > curve.v_max()) return 0.0;
    const auto& segs = curve.segments();
    if (p <= segs.front().p_lo) return curve.mass_at_zero();
    // left-continuity: p belongs to the segment with p in (p_lo, p_hi]
    auto it = std::upper_bound(segs.begin(), segs.end(), p,
                               [](double v, const DemandCurve::Segment& s) { return v <= s.p_hi; });
    const auto& s = *it;
    double t = (p - s.p_lo) / (s.p_hi - s.p_lo);
    return s.m_lo + t * (s.m_hi - s.m_lo);
}

double eval_right(const DemandCurve& curve, double p) {
    if (p < 0.0) throw std::domain_error("eval_right: negative price");
    if (p >= curve.v_max()) return 0.0;
    const auto& segs = curve.segments();
    // right limit: p belongs to the segment with p in [p_lo, p_hi)
    auto it = std::upper_bound(segs.begin(), segs.end(), p,
                               [](double v, const DemandCurve::Segment& s) { return v < s.p_hi; });
    const auto& s = *it;
    if (p <= s.p_lo) return s.m_lo;
    double t = (p - s.p_lo) / (s.p_hi - s.p_lo);
    return s.m_lo + t * (s.m_hi - s.m_lo);
}

double inverse_sup(const DemandCurve& curve, double y) {
    if (y < 0.0) throw std::out_of_range("inverse_sup: negative mass");
    if (y > curve.mass_at_zero() * (1.0 + 1e-12) + kMassTol)
        throw std::out_of_range("inverse_sup: mass exceeds D(0)");
    const auto& segs = curve.segments();
    // largest x with D(x) >= y, scanned from the high-price end
    if (segs.back().m_hi >= y) return curve.v_max();
    for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
        const auto& s = *it;
        if (s.m_hi >= y) return s.p_hi;
        if (s.m_lo >= y)
            return s.p_lo + (s.m_lo - y) / (s.m_lo - s.m_hi) * (s.p_hi - s.p_lo);
    }
    return 0.0;  // y == D(0) up to rounding
}

double inverse_inf(const DemandCurve& curve, double y) {
    if (y < 0.0) throw std::out_of_range("inverse_inf: negative mass");
    if (y > curve.mass_at_zero() * (1.0 + 1e-12) + kMassTol)
        throw std::out_of_range("inverse_inf: mass exceeds D(0)");
    // smallest x with right limit of D at most y
    for (const auto& s : curve.segments()) {
        if (s.m_lo <= y) return s.p_lo;
        if (s.m_hi <= y)
            return s.p_lo + (s.m_lo - y) / (s.m_lo - s.m_hi) * (s.p_hi - s.p_lo);
    }
    return curve.v_max();
}

InverseInterval inverse(const DemandCurve& curve, double y) {
    InverseInterval iv{inverse_inf(curve, y), inverse_sup(curve, y)};
    if (iv.inf_price > iv.sup_price + 1e-9)
        throw std::logic_error("inverse: empty interval");
    if (iv.inf_price > iv.sup_price) iv.inf_price = iv.sup_price;
    return iv;
}

double virtual_value(const DemandCurve& curve, double x) {
    for (const auto& s : curve.segments()) {
        if (x > s.p_lo && x < s.p_hi) {
            double d = s.slope();
            if (d <= 0.0) throw std::domain_error("virtual_value: flat segment, d(x) = 0");
            return x - eval(curve, x) / d;
        }
    }
    throw std::domain_error("virtual_value: derivative unavailable at kink or boundary");
}

RegularityResult check_regular(const DemandCurve& curve, int grid_size) {
    if (grid_size < 2) throw std::invalid_argument("check_regular: grid_size must be >= 2");
    RegularityResult res;
    const double m0 = curve.mass_at_zero();

    // Jumps break differentiability. Flat pieces are tolerated only at the
    // edges of the support (mass D(0) before the curve starts falling, mass 0
    // after it hits zero); an interior flat breaks strict monotonicity where
    // the generalized inverse actually lives.
    for (size_t i = 0; i + 1 < curve.points().size(); ++i) {
        if (curve.points()[i].first == curve.points()[i + 1].first &&
            curve.points()[i].second != curve.points()[i + 1].second) {
            res.regular = false;
            res.x_before = res.x_after = curve.points()[i].first;
            res.reason = "jump discontinuity";
            return res;
        }
    }
    std::vector<const DemandCurve::Segment*> sloped;
    for (const auto& s : curve.segments()) {
        if (s.m_lo == s.m_hi) {
            if (s.m_lo != m0 && s.m_lo != 0.0) {
                res.regular = false;
                res.x_before = s.p_lo;
                res.x_after = s.p_hi;
                res.reason = "interior flat segment";
                return res;
            }
        } else {
            sloped.push_back(&s);
        }
    }
    if (sloped.empty()) {
        res.regular = false;
        res.reason = "no strictly decreasing segment";
        return res;
    }

    auto phi = [&](const DemandCurve::Segment& s, double x) {
        double m = s.m_lo + (x - s.p_lo) / (s.p_hi - s.p_lo) * (s.m_hi - s.m_lo);
        return x - m / s.slope();
    };

    double prev_phi = -std::numeric_limits<double>::infinity();
    double prev_x = 0.0;
    for (const auto* sp : sloped) {
        for (int k = 0; k <= grid_size; ++k) {
            double x = sp->p_lo + (sp->p_hi - sp->p_lo) * k / grid_size;
            double v = phi(*sp, x);  // one-sided value at the segment ends
            if (v < prev_phi - 1e-12) {
                res.regular = false;
                res.x_before = prev_x;
                res.x_after = x;
                res.phi_before = prev_phi;
                res.phi_after = v;
                res.reason = "virtual value decreases";
                return res;
            }
            prev_phi = v;
            prev_x = x;
        }
    }
    return res;
}

PricePoint max_margin_times_residual(const DemandCurve& curve, double cost, double offset,
                                     double lo, double hi, bool open_left) {
    hi = std::min(hi, curve.v_max());
    lo = std::max(lo, 0.0);
    if (lo > hi + 1e-15) throw std::domain_error("max_margin_times_residual: empty range");
    if (lo > hi) lo = hi;

    double best_x = lo;
    double best_v = (lo - cost) * ((open_left ? eval_right(curve, lo) : eval(curve, lo)) + offset);
    auto consider = [&](double x, double mass) {
        double v = (x - cost) * (mass + offset);
        if (v > best_v || (v == best_v && x < best_x)) {
            best_v = v;
            best_x = x;
        }
    };
    for (const auto& [p, m] : curve.points())
        if (p > lo && p <= hi) consider(p, eval(curve, p));
    consider(hi, eval(curve, hi));
    for (const auto& s : curve.segments()) {
        double a = std::max(lo, s.p_lo);
        double b = std::min(hi, s.p_hi);
        if (a >= b) continue;
        double slope = s.slope();
        if (slope <= 0.0) continue;
        // (x - cost) * (M - slope*x) with M = m_lo + slope*p_lo + offset
        double big_m = s.m_lo + slope * s.p_lo + offset;
        double vertex = 0.5 * (big_m / slope + cost);
        if (vertex > a && vertex < b) consider(vertex, s.m_lo - slope * (vertex - s.p_lo));
    }
    return {best_x, best_v};
}

PricePoint monopoly_revenue(const DemandCurve& curve, double unit_cost, double lower_bound) {
    if (lower_bound > curve.v_max() + 1e-15)
        throw std::domain_error("monopoly_revenue: empty feasible region");
    PricePoint best = max_margin_times_residual(curve, unit_cost, 0.0,
                                                std::min(lower_bound, curve.v_max()),
                                                curve.v_max());
    if (best.value < 0.0) return {curve.v_max(), 0.0};
    return best;
}

std::vector<InverseSegment> inverse_segments(const DemandCurve& curve) {
    std::vector<InverseSegment> out;
    const auto& segs = curve.segments();
    if (segs.back().m_hi > 0.0)
        out.push_back({0.0, segs.back().m_hi, curve.v_max(), curve.v_max()});
    for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
        const auto& s = *it;
        if (s.m_lo > s.m_hi) out.push_back({s.m_hi, s.m_lo, s.p_hi, s.p_lo});
        auto left = std::next(it);
        if (left != segs.rend() && left->m_hi > s.m_lo)  // jump at s.p_lo
            out.push_back({s.m_lo, left->m_hi, s.p_lo, s.p_lo});
    }
    if (segs.front().m_lo < curve.mass_at_zero())  // jump at price 0
        out.push_back({segs.front().m_lo, curve.mass_at_zero(), segs.front().p_lo,
                       segs.front().p_lo});
    return out;
}

PricePoint max_revenue_by_quantity(const DemandCurve& curve, double unit_cost, double q_cap) {
    if (q_cap < 0.0) throw std::domain_error("max_revenue_by_quantity: negative cap");
    double best_q = 0.0;
    double best_v = 0.0;
    auto consider = [&](double q, double p) {
        double v = q * (p - unit_cost);
        if (v > best_v) {
            best_v = v;
            best_q = q;
        }
    };
    for (const auto& piece : inverse_segments(curve)) {
        double a = piece.y_lo;
        double b = std::min(piece.y_hi, q_cap);
        if (a > b) continue;
        consider(a, piece.price_at(a));
        consider(b, piece.price_at(b));
        if (piece.y_hi > piece.y_lo && piece.p_at_ylo > piece.p_at_yhi) {
            // revenue y*(alpha - beta*y - c) with price linear in mass
            double beta = (piece.p_at_ylo - piece.p_at_yhi) / (piece.y_hi - piece.y_lo);
            double alpha = piece.p_at_ylo + beta * piece.y_lo;
            double vertex = (alpha - unit_cost) / (2.0 * beta);
            if (vertex > a && vertex < b) consider(vertex, piece.price_at(vertex));
        }
    }
    return {best_q, best_v};
}

double cover_function(const DemandCurve& curve, double append_supply, double unit_cost, double z) {
    if (z <= 0.0 || z > 1.0) throw std::domain_error("cover_function: z must lie in (0, 1]");
    if (append_supply > curve.mass_at_zero() + kMassTol)
        throw std::domain_error("cover_function: supply exceeds D(0)");
    double margin = inverse_sup(curve, append_supply) - unit_cost;
    if (margin <= 0.0)
        throw std::domain_error("cover_function: degenerate market, no margin at full supply");
    if (z == 1.0) return 1.0;
    double pz = inverse_sup(curve, z * append_supply);
    return (pz - unit_cost) * z / margin;
}

double inf_undercut_ratio(const DemandCurve& curve, double cost, double supply, double floor_price) {
    const double p0 = floor_price;
    double best = std::numeric_limits<double>::infinity();

    // x -> floor limit, split on whether the mass gap vanishes at the floor
    double gap0 = supply - eval_right(curve, p0);
    if (gap0 > kMassTol) {
        double margin0 = p0 - cost;
        if (margin0 == 0.0) best = gap0;
        else if (margin0 < 0.0) return -std::numeric_limits<double>::infinity();
        // positive margin: the ratio diverges at the floor, no constraint there
    } else {
        // gap opens linearly: limit is (p0 - cost) times the slope just above p0
        double d_plus = 0.0;
        for (const auto& s : curve.segments()) {
            if (s.p_lo <= p0 && p0 < s.p_hi) {
                d_plus = s.slope();
                break;
            }
        }
        best = (p0 - cost) * d_plus;
    }

    auto consider = [&](double x, double mass) {
        if (x <= p0) return;
        best = std::min(best, (x - cost) * (supply - mass) / (x - p0));
    };

    // breakpoints with both one-sided values, plus the empty tail
    for (const auto& [p, m] : curve.points()) {
        if (p > p0) {
            consider(p, eval(curve, p));
            consider(p, eval_right(curve, p));
        }
    }
    consider(curve.v_max(), 0.0);
    best = std::min(best, supply);  // x -> infinity limit on the tail

    // interior critical points: with t = x - p0 the ratio reads
    // s*t + (w + s*u) + u*w/t, stationary at t = sqrt(u*w/s)
    for (const auto& s : curve.segments()) {
        if (s.p_hi <= p0) continue;
        double slope = s.slope();
        if (slope <= 0.0) continue;
        double u = p0 - cost;
        double w = supply - s.m_lo + slope * (p0 - s.p_lo);
        if (u * w > 0.0) {
            double t = std::sqrt(u * w / slope);
            double x = p0 + t;
            if (x > std::max(s.p_lo, p0) && x < s.p_hi)
                consider(x, s.m_lo - slope * (x - s.p_lo));
        }
    }
    return best;
}

}  // namespace blockmkt
