#pragma once

// Stickiness classification, Frechet means, Gamma, moment transport and
// perturbation probes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "kale/arcs.hpp"
#include "kale/errors.hpp"
#include "kale/generators.hpp"
#include "kale/geometry.hpp"
#include "kale/measure.hpp"

namespace kale {

enum class Stickiness { FullySticky, PartlySticky, NonSticky };

inline const char* to_string(Stickiness s) noexcept {
    switch (s) {
    case Stickiness::FullySticky: return "fully_sticky";
    case Stickiness::PartlySticky: return "partly_sticky";
    case Stickiness::NonSticky: return "nonsticky";
    }
    return "?";
}

/// [a, b] is the fluctuating interval (b = a + width mod alpha).  Unused
/// fields stay zero for FullySticky.
struct Classification {
    Stickiness kind = Stickiness::FullySticky;
    double theta_star = 0.0;
    double r_star = 0.0;  // NonSticky only
    double a = 0.0;
    double b = 0.0;
    double width = 0.0;
    double max_m1 = 0.0;
    double tolerance_used = 0.0;
    bool nondegenerate = true;
    bool all_mass_at_origin = false;

    bool sticky() const noexcept { return kind != Stickiness::NonSticky; }
    AngleArc interval() const noexcept { return {a, width}; }
};

inline double default_eps_class(double mean_radius) noexcept { return 1e-9 * std::max(1.0, mean_radius); }

/// Negative eps_class selects the default.
inline Classification classify(const ArcDecomposition& arcs, double eps_class = -1.0) {
    const ConeGeometry& geom = arcs.geometry();
    const double eps = eps_class < 0.0 ? default_eps_class(arcs.mean_radius()) : eps_class;
    const ProfileMax pm = arcs.profile_max();
    Classification c;
    c.max_m1 = pm.m_star;
    c.tolerance_used = eps;
    if (pm.m_star < -eps) {
        c.kind = Stickiness::FullySticky;
        return c;
    }
    if (pm.m_star <= eps) {
        c.kind = Stickiness::PartlySticky;
        if (pm.flat) {
            c.a = pm.flat_start;
            c.width = pm.flat_length;
            c.b = geom.canonical(c.a + c.width);
        } else {
            c.a = c.b = pm.theta_star;
        }
        c.theta_star = pm.theta_star;
        return c;
    }
    c.kind = Stickiness::NonSticky;
    c.theta_star = pm.theta_star;
    c.r_star = pm.m_star;
    const double tol = geom.boundary_tolerance();
    for (const AngleArc& comp : arcs.superlevel_set(0.0)) {
        if (comp.contains(geom, pm.theta_star, tol)) {
            c.a = comp.start;
            c.width = comp.length;
            c.b = comp.end(geom);
            break;
        }
    }
    return c;
}

inline Classification all_mass_at_origin_classification() {
    Classification c;
    c.kind = Stickiness::PartlySticky;
    c.all_mass_at_origin = true;
    c.nondegenerate = false;
    return c;
}

inline Classification classify(const AtomicMeasure& mu, double eps_class = -1.0) {
    if (mu.empty()) throw EmptyMeasure();
    const std::vector<AngularMass> masses = angular_masses(mu);
    if (masses.empty()) {
        Classification c = all_mass_at_origin_classification();
        c.tolerance_used = eps_class < 0.0 ? default_eps_class(0.0) : eps_class;
        return c;
    }
    Classification c = classify(ArcDecomposition(mu.geometry(), masses, mu.total_weight()), eps_class);
    c.nondegenerate = is_nondegenerate(mu);
    return c;
}

/// Continuous generators are classified in closed form.
inline Classification classify(const SampleableMeasure& mu, double eps_class = -1.0) {
    if (mu.has_moment_surrogate()) return classify(mu.moment_surrogate(), eps_class);
    const double eps = eps_class < 0.0 ? default_eps_class(mu.first_radial_moment()) : eps_class;
    Classification c;
    c.tolerance_used = eps;
    if (mu.get_if<HeavyTail>() != nullptr) {
        // Rotation invariant: m_{theta,1} is the same constant for every theta.
        c.max_m1 = mu.folded_moment(0.0).m1;
        c.kind = c.max_m1 < -eps ? Stickiness::FullySticky : Stickiness::PartlySticky;
        return c;
    }
    const auto* arc = mu.get_if<CircleArcUniform>();
    // m_{center + s, 1} = (sin|s| - |s|) / (2 pi): zero only at the center.
    c.kind = Stickiness::PartlySticky;
    c.theta_star = c.a = c.b = mu.geometry().canonical(arc->center);
    c.max_m1 = 0.0;
    return c;
}

inline KalePoint mean_from(const Classification& c) noexcept {
    if (c.kind != Stickiness::NonSticky) return KalePoint::origin();
    return {c.r_star, c.theta_star};
}

inline KalePoint mean(const AtomicMeasure& mu, double eps_class = -1.0) { return mean_from(classify(mu, eps_class)); }

inline KalePoint mean(const SampleableMeasure& mu, double eps_class = -1.0) {
    return mean_from(classify(mu, eps_class));
}

/// Barycenter of unit masses already reduced to angular masses; `count`
/// includes points at the origin.
inline KalePoint barycenter_of_masses(const ConeGeometry& geom, std::span<const AngularMass> masses, double count) {
    if (!(count > 0.0)) throw EmptyMeasure();
    if (masses.empty()) return KalePoint::origin();
    return mean_from(classify(ArcDecomposition(geom, masses, count)));
}

inline KalePoint empirical_barycenter(std::span<const KalePoint> points, const ConeGeometry& geom) {
    if (points.empty()) throw EmptyMeasure();
    const std::vector<AngularMass> masses = angular_masses(points);
    return barycenter_of_masses(geom, masses, static_cast<double>(points.size()));
}

inline double gamma(const AtomicMeasure& mu, const KalePoint& p) {
    if (mu.empty()) throw EmptyMeasure();
    double s = 0.0;
    for (const Atom& a : mu.atoms()) {
        const double d = kale_dist(mu.geometry(), p, a.point);
        s += a.weight * d * d;
    }
    return 0.5 * s / mu.total_weight();
}

inline double gamma_via_moment(const AtomicMeasure& mu, const KalePoint& p) {
    const double g0 = 0.5 * second_radial_moment(mu);
    if (p.is_origin()) return g0;
    return 0.5 * p.r * p.r - p.r * folded_moment(mu, p.theta).m1 + g0;
}

/// Transports m_{theta_hat} to m_theta along the shorter path by
/// integrating the shadow-mass ODE exactly between shadow breakpoints.
inline FoldedMoment moment_transport(const AtomicMeasure& mu, double theta_hat, double theta) {
    const ConeGeometry& geom = mu.geometry();
    const double s = signed_diff(geom, theta, theta_hat);
    const FoldedMoment start = folded_moment(mu, theta_hat);
    if (s == 0.0) return start;

    // Path offsets t in (0, s) where the open shadow changes.
    std::vector<double> cuts{0.0, s};
    for (const Atom& a : mu.atoms()) {
        if (a.point.is_origin()) continue;
        for (double edge : {a.point.theta + kPi, a.point.theta - kPi}) {
            const double fwd = geom.canonical(edge - theta_hat);
            const double t = s > 0.0 ? fwd : (fwd == 0.0 ? 0.0 : fwd - geom.alpha());
            if ((s > 0.0 && t > 0.0 && t < s) || (s < 0.0 && t < 0.0 && t > s)) cuts.push_back(t);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    if (s < 0.0) std::reverse(cuts.begin(), cuts.end());

    double i_sin = 0.0;
    double i_cos = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double t0 = cuts[i];
        const double t1 = cuts[i + 1];
        if (t0 == t1) continue;
        const double w = w_shadow(mu, theta_hat + 0.5 * (t0 + t1));
        if (w == 0.0) continue;
        i_sin += w * (std::cos(s - t1) - std::cos(s - t0));
        i_cos += w * (std::sin(s - t0) - std::sin(s - t1));
    }
    const double cs = std::cos(s);
    const double sn = std::sin(s);
    return {start.m1 * cs + start.m2 * sn - i_sin, -start.m1 * sn + start.m2 * cs - i_cos};
}

enum class ProbeVerdict { Sticky, Fluctuating };

struct ProbeResult {
    ProbeVerdict verdict = ProbeVerdict::Sticky;
    double epsilon_used = 0.0;
    KalePoint mean_before;
    KalePoint mean_after;
};

/// Compares the mean of mu with that of (1 - eps) mu + eps nu and of the
/// eps / 2 mixture.
inline ProbeResult perturbation_probe(const AtomicMeasure& mu, const AtomicMeasure& nu, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("probe epsilon must lie in (0, 1)");
    const ConeGeometry& geom = mu.geometry();
    ProbeResult out;
    out.epsilon_used = eps;
    out.mean_before = mean(mu);
    out.mean_after = mean(mu.mixed_with(nu, eps));
    const KalePoint half = mean(mu.mixed_with(nu, 0.5 * eps));
    const bool same = kale_dist(geom, out.mean_before, out.mean_after) <= 1e-10 &&
                      kale_dist(geom, out.mean_before, half) <= 1e-10;
    out.verdict = same ? ProbeVerdict::Sticky : ProbeVerdict::Fluctuating;
    return out;
}

} // namespace kale
