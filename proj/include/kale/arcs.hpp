#pragma once

// Piecewise-trigonometric structure of theta -> m_theta for atomic
// measures.  Between consecutive shadow breakpoints (atom angles +/- pi)
// the visible set is fixed, so m_{theta,1} = rho_a cos(theta - phi_a) - W_a.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "kale/errors.hpp"
#include "kale/geometry.hpp"
#include "kale/measure.hpp"

namespace kale {

/// Total radial mass (sum of weight * r) carried by one ray.
struct AngularMass {
    double theta = 0.0;
    double mass = 0.0;

    friend bool operator==(const AngularMass&, const AngularMass&) = default;
};

namespace detail {

inline std::vector<AngularMass> merge_sorted_masses(std::vector<AngularMass> items) {
    std::stable_sort(items.begin(), items.end(),
                     [](const AngularMass& a, const AngularMass& b) { return a.theta < b.theta; });
    std::vector<AngularMass> out;
    for (const AngularMass& m : items) {
        if (!out.empty() && out.back().theta == m.theta) {
            out.back().mass += m.mass;
        } else {
            out.push_back(m);
        }
    }
    return out;
}

} // namespace detail

/// Radial masses per distinct positive-radius angle, ascending.  Masses on
/// one angle are summed in input order.
inline std::vector<AngularMass> angular_masses(const AtomicMeasure& mu) {
    std::vector<AngularMass> items;
    items.reserve(mu.size());
    for (const Atom& a : mu.atoms()) {
        if (!a.point.is_origin()) items.push_back({a.point.theta, a.weight * a.point.r});
    }
    return detail::merge_sorted_masses(std::move(items));
}

/// Same for unit-weight points.
inline std::vector<AngularMass> angular_masses(std::span<const KalePoint> points) {
    std::vector<AngularMass> items;
    items.reserve(points.size());
    for (const KalePoint& p : points) {
        if (!p.is_origin()) items.push_back({p.theta, p.r});
    }
    return detail::merge_sorted_masses(std::move(items));
}

struct ProfileMax {
    double theta_star = 0.0;
    double m_star = 0.0;
    bool flat = false;         // maximum attained on an interval
    double flat_start = 0.0;   // that interval, when flat
    double flat_length = 0.0;
};

/// Cyclic angular interval [start, start + length].
struct AngleArc {
    double start = 0.0;
    double length = 0.0;

    double end(const ConeGeometry& geom) const noexcept { return geom.canonical(start + length); }
    double midpoint(const ConeGeometry& geom) const noexcept { return geom.canonical(start + 0.5 * length); }
    bool contains(const ConeGeometry& geom, double theta, double tol) const noexcept {
        const double d = geom.canonical(theta - start);
        return d <= length + tol || d >= geom.alpha() - tol;
    }
};

/// Merges arcs that touch within `tol`, including across the wrap point.
inline std::vector<AngleArc> merge_cyclic(const ConeGeometry& geom, std::vector<AngleArc> pieces, double tol) {
    if (pieces.empty()) return pieces;
    const double alpha = geom.alpha();
    std::sort(pieces.begin(), pieces.end(), [](const AngleArc& a, const AngleArc& b) { return a.start < b.start; });
    std::vector<AngleArc> out{pieces.front()};
    for (std::size_t i = 1; i < pieces.size(); ++i) {
        AngleArc& cur = out.back();
        const AngleArc& p = pieces[i];
        if (p.start <= cur.start + cur.length + tol) {
            cur.length = std::max(cur.length, p.start + p.length - cur.start);
        } else {
            out.push_back(p);
        }
    }
    if (out.size() > 1) {
        const AngleArc& last = out.back();
        const AngleArc& first = out.front();
        if (last.start + last.length + tol >= first.start + alpha) {
            const double len = std::max(last.length, first.start + alpha + first.length - last.start);
            AngleArc joined{last.start, len};
            out.pop_back();
            out.front() = joined;
        }
    }
    for (AngleArc& a : out) {
        if (a.length >= alpha - tol) a = {0.0, alpha};
    }
    return out;
}

class ArcDecomposition {
public:
    struct Arc {
        double start = 0.0;
        double length = 0.0;
        double ref = 0.0;        // start + length / 2, canonical
        double vx = 0.0;         // visible resultant in the frame of ref
        double vy = 0.0;
        double invisible = 0.0;  // W_a

        double resultant() const noexcept { return std::hypot(vx, vy); }
        double m1_at_offset(double u) const noexcept { return vx * std::cos(u) + vy * std::sin(u) - invisible; }
        double m2_at_offset(double u) const noexcept { return vy * std::cos(u) - vx * std::sin(u); }
    };

    /// `masses` ascending by angle with distinct angles; `total_weight`
    /// includes any mass at the origin.
    ArcDecomposition(const ConeGeometry& geom, std::span<const AngularMass> masses, double total_weight)
        : geom_(geom) {
        if (!(total_weight > 0.0)) throw EmptyMeasure();
        double sum = 0.0;
        for (const AngularMass& m : masses) sum += m.mass;
        if (masses.empty() || !(sum > 0.0)) throw AllMassAtOrigin();
        mean_radius_ = sum / total_weight;
        build(masses, total_weight);
    }

    static ArcDecomposition of(const AtomicMeasure& mu) {
        if (mu.empty()) throw EmptyMeasure();
        const std::vector<AngularMass> masses = angular_masses(mu);
        return {mu.geometry(), masses, mu.total_weight()};
    }

    const ConeGeometry& geometry() const noexcept { return geom_; }
    std::span<const double> breakpoints() const noexcept { return breakpoints_; }
    std::span<const Arc> arcs() const noexcept { return arcs_; }
    double mean_radius() const noexcept { return mean_radius_; }

    std::size_t arc_index(double theta) const noexcept {
        const double t = geom_.canonical(theta);
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        if (it == breakpoints_.begin()) return arcs_.size() - 1;
        return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    }

    double offset_in_arc(const Arc& a, double theta) const noexcept {
        return geom_.canonical(theta - a.start) - 0.5 * a.length;
    }

    FoldedMoment moment(double theta) const noexcept {
        const Arc& a = arcs_[arc_index(theta)];
        const double u = offset_in_arc(a, theta);
        return {a.m1_at_offset(u), a.m2_at_offset(u)};
    }
    double m1(double theta) const noexcept { return moment(theta).m1; }

    /// Exact global maximum of theta -> m_{theta,1}.
    ProfileMax profile_max() const {
        double best = -std::numeric_limits<double>::infinity();
        double best_theta = 0.0;
        auto offer = [&](double value, double theta) {
            const double t = geom_.canonical(theta);
            if (value > best || (value == best && t < best_theta)) {
                best = value;
                best_theta = t;
            }
        };
        for (const Arc& a : arcs_) {
            const double half = 0.5 * a.length;
            offer(a.m1_at_offset(-half), a.ref - half);
            offer(a.m1_at_offset(half), a.ref + half);
            const double rho = a.resultant();
            if (rho > 0.0) {
                const double u0 = std::atan2(a.vy, a.vx);
                if (std::abs(u0) <= half) offer(rho - a.invisible, a.ref + u0);
            }
        }
        ProfileMax out{best_theta, best, false, 0.0, 0.0};
        const double tol = flat_tolerance();
        std::vector<AngleArc> flats;
        for (const Arc& a : arcs_) {
            if (a.resultant() <= tol && std::abs(-a.invisible - best) <= tol) flats.push_back({a.start, a.length});
        }
        if (!flats.empty()) {
            const std::vector<AngleArc> comps = merge_cyclic(geom_, std::move(flats), geom_.boundary_tolerance());
            const AngleArc* pick = &comps.front();
            for (const AngleArc& c : comps) {
                if (c.midpoint(geom_) < pick->midpoint(geom_)) pick = &c;
            }
            out.flat = true;
            out.flat_start = pick->start;
            out.flat_length = pick->length;
            out.theta_star = pick->midpoint(geom_);
        }
        return out;
    }

    /// Components of {theta : m_{theta,1} >= level}.
    std::vector<AngleArc> superlevel_set(double level) const {
        std::vector<AngleArc> pieces;
        const double tol = flat_tolerance();
        for (const Arc& a : arcs_) {
            const double half = 0.5 * a.length;
            const double rho = a.resultant();
            const double need = a.invisible + level;  // rho cos(u - u0) >= need
            if (rho <= tol) {
                if (-a.invisible >= level) pieces.push_back({a.start, a.length});
                continue;
            }
            if (need > rho) continue;
            const double h = need <= -rho ? kPi : std::acos(need / rho);
            const double u0 = std::atan2(a.vy, a.vx);
            for (double shift : {-kTwoPi, 0.0, kTwoPi}) {
                const double lo = std::max(-half, u0 + shift - h);
                const double hi = std::min(half, u0 + shift + h);
                if (hi >= lo) pieces.push_back({geom_.canonical(a.ref + lo), hi - lo});
            }
        }
        return merge_cyclic(geom_, std::move(pieces), geom_.boundary_tolerance());
    }

    double flat_tolerance() const noexcept { return 1e-12 * std::max(1.0, mean_radius_); }

private:
    void build(std::span<const AngularMass> masses, double total_weight) {
        const double alpha = geom_.alpha();
        for (const AngularMass& m : masses) {
            breakpoints_.push_back(geom_.canonical(m.theta + kPi));
            breakpoints_.push_back(geom_.canonical(m.theta - kPi));
        }
        std::sort(breakpoints_.begin(), breakpoints_.end());
        breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());

        // Atoms replicated at theta - alpha, theta, theta + alpha so that every
        // visible window (psi - pi, psi + pi) with psi in [0, alpha) is contiguous.
        const std::size_t k = masses.size();
        std::vector<double> ext(3 * k);
        std::vector<long double> pc(3 * k + 1, 0.0L), ps(3 * k + 1, 0.0L), pm(3 * k + 1, 0.0L);
        long double total = 0.0L;
        for (std::size_t j = 0; j < k; ++j) total += masses[j].mass / total_weight;
        const long double ca = std::cos(static_cast<long double>(alpha));
        const long double sa = std::sin(static_cast<long double>(alpha));
        std::vector<long double> cos0(k), sin0(k);
        for (std::size_t j = 0; j < k; ++j) {
            cos0[j] = std::cos(masses[j].theta);
            sin0[j] = std::sin(masses[j].theta);
        }
        for (int rep = 0; rep < 3; ++rep) {
            const long double shift_sin = (rep - 1) * sa;  // sin((rep - 1) alpha)
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t i = rep * k + j;
                ext[i] = masses[j].theta + (rep - 1) * alpha;
                const long double c = masses[j].mass / total_weight;
                const long double cj = rep == 1 ? cos0[j] : cos0[j] * ca - sin0[j] * shift_sin;
                const long double sj = rep == 1 ? sin0[j] : sin0[j] * ca + cos0[j] * shift_sin;
                pc[i + 1] = pc[i] + c * cj;
                ps[i + 1] = ps[i] + c * sj;
                pm[i + 1] = pm[i] + c;
            }
        }

        const std::size_t nb = breakpoints_.size();
        arcs_.reserve(nb);
        for (std::size_t i = 0; i < nb; ++i) {
            Arc a;
            a.start = breakpoints_[i];
            const double end = i + 1 < nb ? breakpoints_[i + 1] : breakpoints_[0] + alpha;
            a.length = end - a.start;
            const double psi = a.start + 0.5 * a.length;
            a.ref = geom_.canonical(psi);
            const double centre = a.ref;
            const auto lo = static_cast<std::size_t>(std::upper_bound(ext.begin(), ext.end(), centre - kPi) - ext.begin());
            const auto hi = static_cast<std::size_t>(std::lower_bound(ext.begin(), ext.end(), centre + kPi) - ext.begin());
            const long double sc = hi > lo ? pc[hi] - pc[lo] : 0.0L;
            const long double ss = hi > lo ? ps[hi] - ps[lo] : 0.0L;
            const long double sm = hi > lo ? pm[hi] - pm[lo] : 0.0L;
            const long double cr = std::cos(centre);
            const long double sr = std::sin(centre);
            a.vx = static_cast<double>(cr * sc + sr * ss);
            a.vy = static_cast<double>(cr * ss - sr * sc);
            a.invisible = std::max(0.0, static_cast<double>(total - sm));
            arcs_.push_back(a);
        }
    }

    ConeGeometry geom_;
    std::vector<double> breakpoints_;
    std::vector<Arc> arcs_;
    double mean_radius_ = 0.0;
};

} // namespace kale
