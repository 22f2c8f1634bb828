#pragma once

// Limit laws of rescaled empirical barycenters: a Dirac mass at the origin
// (fully sticky), the sector-projected Gaussian (partly sticky), and the
// plane Gaussian seen through the kappa correction (nonsticky).

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/owens_t.hpp>

#include "kale/errors.hpp"
#include "kale/generators.hpp"
#include "kale/geometry.hpp"
#include "kale/mean.hpp"
#include "kale/measure.hpp"
#include "kale/random.hpp"

namespace kale {

struct CovarianceMatrix {
    double s11 = 0.0;
    double s12 = 0.0;
    double s22 = 0.0;

    double det() const noexcept { return s11 * s22 - s12 * s12; }
    double trace() const noexcept { return s11 + s22; }
    /// v^T Sigma w
    double form(PlanePoint v, PlanePoint w) const noexcept {
        return v.z1 * (s11 * w.z1 + s12 * w.z2) + v.z2 * (s12 * w.z1 + s22 * w.z2);
    }

    friend bool operator==(const CovarianceMatrix&, const CovarianceMatrix&) = default;
};

/// Eigenpairs with eigenvalues floored at zero, largest first.
struct Eigen2 {
    double lambda1 = 0.0, lambda2 = 0.0;
    PlanePoint v1{1.0, 0.0}, v2{0.0, 1.0};
};

inline Eigen2 eigen(const CovarianceMatrix& s) noexcept {
    const double half_tr = 0.5 * s.trace();
    const double disc = std::hypot(0.5 * (s.s11 - s.s22), s.s12);
    Eigen2 e;
    e.lambda1 = std::max(0.0, half_tr + disc);
    e.lambda2 = std::max(0.0, half_tr - disc);
    if (disc > 0.0) {
        const double phi = 0.5 * std::atan2(2.0 * s.s12, s.s11 - s.s22);
        e.v1 = {std::cos(phi), std::sin(phi)};
        e.v2 = {-std::sin(phi), std::cos(phi)};
    }
    return e;
}

/// Second moment of the measure folded about theta, optionally centered at
/// the folded mean.
inline CovarianceMatrix covariance(const AtomicMeasure& mu, double theta, bool centered) {
    if (mu.empty()) throw EmptyMeasure();
    CovarianceMatrix s;
    for (const Atom& a : mu.atoms()) {
        const PlanePoint y = fold(mu.geometry(), theta, a.point);
        s.s11 += a.weight * y.z1 * y.z1;
        s.s12 += a.weight * y.z1 * y.z2;
        s.s22 += a.weight * y.z2 * y.z2;
    }
    const double w = mu.total_weight();
    s = {s.s11 / w, s.s12 / w, s.s22 / w};
    if (centered) {
        const FoldedMoment m = folded_moment(mu, theta);
        s = {s.s11 - m.m1 * m.m1, s.s12 - m.m1 * m.m2, s.s22 - m.m2 * m.m2};
    }
    return s;
}

inline CovarianceMatrix covariance(const SampleableMeasure& mu, double theta, bool centered) {
    if (mu.is_atomic()) return covariance(mu.atomic(), theta, centered);
    if (!mu.is_square_integrable()) throw NotSquareIntegrable();
    const ConeGeometry& geom = mu.geometry();
    CovarianceMatrix s;
    if (const auto* spider = mu.get_if<SpiderRays>()) {
        double total = 0.0;
        for (const SpiderLeg& leg : spider->legs) {
            const PlanePoint u = fold(geom, theta, {1.0, leg.theta});
            const double q = leg.weight * leg.law.second_moment();
            s.s11 += q * u.z1 * u.z1;
            s.s12 += q * u.z1 * u.z2;
            s.s22 += q * u.z2 * u.z2;
            total += leg.weight;
        }
        s = {s.s11 / total, s.s12 / total, s.s22 / total};
    } else {
        const auto* arc = mu.get_if<CircleArcUniform>();
        const ArcFoldIntegrals in = arc_fold_integrals(geom, theta, arc->center - kPi, kTwoPi);
        s = {in.cc / kTwoPi, in.cs / kTwoPi, in.ss / kTwoPi};
    }
    if (centered) {
        const FoldedMoment m = mu.folded_moment(theta);
        s = {s.s11 - m.m1 * m.m1, s.s12 - m.m1 * m.m2, s.s22 - m.m2 * m.m2};
    }
    return s;
}

struct DiracOrigin {
    friend bool operator==(const DiracOrigin&, const DiracOrigin&) = default;
};

struct SectorGaussian {
    double theta_star = 0.0;
    double rho = 0.0;  // half-width of [A, B], in [0, pi/2)
    CovarianceMatrix sigma;

    double a(const ConeGeometry& geom) const noexcept { return geom.canonical(theta_star - rho); }
    AngleArc interval(const ConeGeometry& geom) const noexcept { return {a(geom), 2.0 * rho}; }

    friend bool operator==(const SectorGaussian&, const SectorGaussian&) = default;
};

struct KappaGaussian {
    double theta_star = 0.0;
    double r_star = 0.0;
    CovarianceMatrix sigma;
    double w_plus = 0.0;
    double w_minus = 0.0;

    friend bool operator==(const KappaGaussian&, const KappaGaussian&) = default;
};

using LimitLaw = std::variant<DiracOrigin, SectorGaussian, KappaGaussian>;

inline const char* law_tag(const LimitLaw& law) noexcept {
    switch (law.index()) {
    case 0: return "dirac_origin";
    case 1: return "sector_gaussian";
    default: return "kappa_gaussian";
    }
}

inline LimitLaw limit_law(const SampleableMeasure& mu, const Classification& c) {
    switch (c.kind) {
    case Stickiness::FullySticky: return DiracOrigin{};
    case Stickiness::PartlySticky: {
        if (c.all_mass_at_origin) return SectorGaussian{0.0, 0.0, {}};
        if (!c.nondegenerate) throw PreconditionError("no limit law for a measure carried by two opposite rays");
        if (!mu.is_square_integrable()) throw NotSquareIntegrable();
        const double rho = 0.5 * c.width;
        if (!(rho < kHalfPi)) throw PreconditionError("fluctuating interval is not shorter than pi");
        return SectorGaussian{c.theta_star, rho, covariance(mu, c.theta_star, false)};
    }
    case Stickiness::NonSticky: {
        if (!c.nondegenerate) throw PreconditionError("no limit law for a measure carried by two opposite rays");
        if (!mu.is_square_integrable()) throw NotSquareIntegrable();
        KappaGaussian k{c.theta_star, c.r_star, covariance(mu, c.theta_star, true), 0.0, 0.0};
        if (mu.has_moment_surrogate()) {
            const AtomicMeasure s = mu.moment_surrogate();
            k.w_plus = w_pm(s, c.theta_star, Side::Plus);
            k.w_minus = w_pm(s, c.theta_star, Side::Minus);
        }
        return k;
    }
    }
    return DiracOrigin{};
}

inline LimitLaw limit_law(const AtomicMeasure& mu, const Classification& c) {
    return limit_law(SampleableMeasure(mu), c);
}

/// Correction factor for the transverse coordinate, chosen by the side of
/// the horizontal axis the folded barycenter lies on.
inline double kappa_value(const KappaGaussian& law, double side_sign) noexcept {
    if (side_sign < 0.0) return law.w_plus / law.r_star;
    if (side_sign > 0.0) return law.w_minus / law.r_star;
    return 0.0;
}

struct MassDecomposition {
    double origin_mass = 0.0;
    double edge_mass = 0.0;
    double interior_mass = 0.0;
};

namespace detail {

inline bool is_singular(const CovarianceMatrix& s) noexcept {
    const double tr = s.trace();
    return !(tr > 0.0) || s.det() <= 1e-14 * tr * tr;
}

/// Density of the polar angle of N(0, Sigma).
inline double angular_density(const CovarianceMatrix& s, double vartheta) noexcept {
    const double c = std::cos(vartheta);
    const double sn = std::sin(vartheta);
    const double det = s.det();
    // u^T Sigma^{-1} u
    const double q = (s.s22 * c * c - 2.0 * s.s12 * c * sn + s.s11 * sn * sn) / det;
    return 1.0 / (kTwoPi * std::sqrt(det) * q);
}

inline double angular_probability(const CovarianceMatrix& s, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    auto f = [&](double t) { return angular_density(s, t); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-12);
}

enum class Region { Interior, Edge, Origin };

inline Region region_of(double rho, double vartheta) noexcept {
    const double a = std::abs(std::remainder(vartheta, kTwoPi));
    if (a <= rho) return Region::Interior;
    if (a < rho + kHalfPi) return Region::Edge;
    return Region::Origin;
}

} // namespace detail

/// Masses the projected Gaussian puts on the origin, on the two edge rays
/// and on the open sector.
inline MassDecomposition mass_decomposition(const SectorGaussian& law) {
    const double rho = law.rho;
    if (!(rho >= 0.0 && rho < kHalfPi)) throw InvalidRho(rho);
    const CovarianceMatrix& s = law.sigma;
    MassDecomposition m;
    if (detail::is_singular(s)) {
        const Eigen2 e = eigen(s);
        if (!(e.lambda1 > 0.0)) {
            m.origin_mass = 1.0;
            return m;
        }
        // Mass splits evenly between the two directions of the principal axis.
        for (double sign : {1.0, -1.0}) {
            const double t = std::atan2(sign * e.v1.z2, sign * e.v1.z1);
            switch (detail::region_of(rho, t)) {
            case detail::Region::Interior: m.interior_mass += 0.5; break;
            case detail::Region::Edge: m.edge_mass += 0.5; break;
            case detail::Region::Origin: m.origin_mass += 0.5; break;
            }
        }
        return m;
    }
    m.interior_mass = detail::angular_probability(s, -rho, rho);
    m.edge_mass = detail::angular_probability(s, rho, rho + kHalfPi) +
                  detail::angular_probability(s, 1.5 * kPi - rho, kTwoPi - rho);
    m.origin_mass = detail::angular_probability(s, rho + kHalfPi, 1.5 * kPi - rho);
    return m;
}

inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// P(projected point lies on an edge ray at radius <= x | it lies on an edge).
inline double edge_radial_cdf(const SectorGaussian& law, double x) {
    if (!(x > 0.0)) return 0.0;
    const double rho = law.rho;
    const CovarianceMatrix& s = law.sigma;
    double num = 0.0;
    double den = 0.0;
    for (double side : {1.0, -1.0}) {
        const PlanePoint u{std::cos(rho), side * std::sin(rho)};
        const PlanePoint n{-std::sin(rho), side * std::cos(rho)};
        const double vx = s.form(u, u);
        const double vy = s.form(n, n);
        const double cxy = s.form(u, n);
        if (!(vx > 0.0)) continue;
        const double sx = std::sqrt(vx);
        const double cond = std::max(0.0, vy - cxy * cxy / vx);
        // P(X in [0, x], Y >= 0) with X the edge coordinate and Y the outward
        // normal one.  With u = X / sx this is the integral over [0, x / sx]
        // of phi(u) Phi(a u), closed form through Owen's T.
        const double h = x / sx;
        double p_all, p_tail;
        if (cond > 0.0) {
            const double a = cxy / (sx * std::sqrt(cond));
            p_all = 0.25 + std::atan(a) / kTwoPi;
            p_tail = 0.5 * normal_cdf(-h) + boost::math::owens_t(h, a);
        } else {
            // Y is a fixed nonnegative or negative multiple of X.
            const double frac = cxy >= 0.0 ? 1.0 : 0.0;
            p_all = 0.5 * frac;
            p_tail = frac * normal_cdf(-h);
        }
        den += p_all;
        num += std::max(0.0, p_all - p_tail);
    }
    if (!(den > 0.0)) return 0.0;
    return std::min(1.0, num / den);
}

namespace detail {

inline PlanePoint gaussian_draw(const Eigen2& e, Rng& rng) {
    const PlanePoint g = standard_normal_pair(rng);
    return std::sqrt(e.lambda1) * g.z1 * e.v1 + std::sqrt(e.lambda2) * g.z2 * e.v2;
}

} // namespace detail

/// Largest angle not beyond the arc's end under the arc's own membership test.
inline double clamp_into(const ConeGeometry& geom, const AngleArc& arc, double theta) noexcept {
    double t = geom.canonical(theta);
    while (geom.canonical(t - arc.start) > arc.length) {
        t = t > 0.0 ? std::nextafter(t, 0.0) : std::nextafter(geom.alpha(), 0.0);
    }
    return t;
}

inline std::vector<KalePoint> sample_limit(const DiracOrigin&, Rng&, std::size_t n) {
    return std::vector<KalePoint>(n, KalePoint::origin());
}

/// Gaussian draws pushed through the projection onto the sector of
/// half-angle rho, then unfolded onto C_[A,B] about theta_star.
inline std::vector<KalePoint> sample_limit(const SectorGaussian& law, const ConeGeometry& geom, Rng& rng,
                                           std::size_t n) {
    const Eigen2 e = eigen(law.sigma);
    const AngleArc arc = law.interval(geom);
    std::vector<KalePoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PlanePoint q = convex_project(law.rho, detail::gaussian_draw(e, rng));
        const double r = q.norm();
        if (r == 0.0) {
            out.push_back(KalePoint::origin());
            continue;
        }
        const double phi = std::clamp(std::atan2(q.z2, q.z1), -law.rho, law.rho);
        double theta;
        if (phi == -law.rho) {
            theta = arc.start;
        } else {
            theta = clamp_into(geom, arc, arc.start + (phi + law.rho));
        }
        out.push_back({r, theta});
    }
    return out;
}

inline std::vector<PlanePoint> sample_limit(const KappaGaussian& law, Rng& rng, std::size_t n) {
    const Eigen2 e = eigen(law.sigma);
    std::vector<PlanePoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(detail::gaussian_draw(e, rng));
    return out;
}

} // namespace kale
