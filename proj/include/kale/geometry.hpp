#pragma once

// Geometry of the kale: the metric cone over a circle of circumference
// alpha > 2*pi.  Angles live in R / alpha Z and are stored by their
// canonical representative in [0, alpha).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kale/errors.hpp"

namespace kale {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

class ConeGeometry {
public:
    /// Rejects alpha <= 2*pi (plane and ice-cream cones).  `tolerance_scale`
    /// sets how close to the +/-pi boundary an angle must be to count as on it.
    explicit ConeGeometry(double alpha, double tolerance_scale = 1e-12)
        : alpha_(alpha), tolerance_(tolerance_scale * std::max(1.0, alpha)) {
        if (!std::isfinite(alpha) || !(alpha > kTwoPi)) {
            throw InputError("angle sum alpha must be finite and exceed 2*pi, got " +
                             std::to_string(alpha));
        }
        if (!(tolerance_scale >= 0.0) || !std::isfinite(tolerance_scale)) {
            throw InputError("tolerance scale must be finite and nonnegative");
        }
    }

    double alpha() const noexcept { return alpha_; }
    double boundary_tolerance() const noexcept { return tolerance_; }

    double canonical(double angle) const noexcept {
        double a = std::fmod(angle, alpha_);
        if (a < 0.0) a += alpha_;
        if (a >= alpha_) a = 0.0;
        return a;
    }

    friend bool operator==(const ConeGeometry& a, const ConeGeometry& b) noexcept {
        return a.alpha_ == b.alpha_;
    }

private:
    double alpha_;
    double tolerance_;
};

struct KalePoint {
    double r = 0.0;
    double theta = 0.0;

    bool is_origin() const noexcept { return r == 0.0; }
    static constexpr KalePoint origin() noexcept { return {}; }

    friend bool operator==(const KalePoint&, const KalePoint&) = default;
};

/// Builds a point with canonical angle; the origin always stores theta = 0.
inline KalePoint make_point(const ConeGeometry& geom, double r, double theta) {
    if (!std::isfinite(r) || r < 0.0) throw InputError("radius must be finite and >= 0");
    if (!std::isfinite(theta)) throw InputError("angle must be finite");
    if (r == 0.0) return KalePoint::origin();
    return {r, geom.canonical(theta)};
}

struct PlanePoint {
    double z1 = 0.0;
    double z2 = 0.0;

    double norm() const noexcept { return std::hypot(z1, z2); }

    friend PlanePoint operator+(PlanePoint a, PlanePoint b) noexcept { return {a.z1 + b.z1, a.z2 + b.z2}; }
    friend PlanePoint operator-(PlanePoint a, PlanePoint b) noexcept { return {a.z1 - b.z1, a.z2 - b.z2}; }
    friend PlanePoint operator*(double s, PlanePoint a) noexcept { return {s * a.z1, s * a.z2}; }
    friend bool operator==(const PlanePoint&, const PlanePoint&) = default;
};

inline constexpr PlanePoint kE1{1.0, 0.0};
inline constexpr PlanePoint kE2{0.0, 1.0};

inline double dot(PlanePoint a, PlanePoint b) noexcept { return a.z1 * b.z1 + a.z2 * b.z2; }
inline double plane_dist(PlanePoint a, PlanePoint b) noexcept { return (a - b).norm(); }

/// |b - a| in R / alpha Z; always in [0, alpha/2].
inline double angle_dist(const ConeGeometry& geom, double a, double b) noexcept {
    const double d = geom.canonical(std::abs(b - a));  // |b - a| keeps the result symmetric bit for bit
    return std::min(d, geom.alpha() - d);
}

/// Representative of a - b in [-pi, pi].  An exact tie at distance pi
/// returns +pi.
inline double signed_diff(const ConeGeometry& geom, double a, double b) {
    const double d = geom.canonical(a - b);
    const double tol = geom.boundary_tolerance();
    if (d <= kPi) return d;
    const double neg = d - geom.alpha();
    if (neg >= -kPi) return neg == -kPi ? kPi : neg;
    if (std::abs(d - kPi) <= tol || std::abs(neg + kPi) <= tol) return kPi;
    throw DistanceExceedsPi();
}

/// Where the angle `theta` sits relative to the fold center.
enum class Offset { Visible, PlusPi, MinusPi, Shadow };

struct OffsetInfo {
    Offset kind;
    double value;  // signed offset in (-pi, pi) when Visible
};

/// Classifies theta - center: strictly visible, on the +pi or -pi
/// boundary ray, or in the open shadow.
inline OffsetInfo classify_offset(const ConeGeometry& geom, double center, double theta) noexcept {
    const double d = geom.canonical(theta - center);
    const double tol = geom.boundary_tolerance();
    const double upper = geom.alpha() - kPi;
    if (std::abs(d - kPi) <= tol) return {Offset::PlusPi, kPi};
    if (std::abs(d - upper) <= tol) return {Offset::MinusPi, -kPi};
    if (d < kPi) return {Offset::Visible, d};
    if (d > upper) return {Offset::Visible, d - geom.alpha()};
    return {Offset::Shadow, 0.0};
}

inline double kale_dist(const ConeGeometry& geom, const KalePoint& p, const KalePoint& q) noexcept {
    if (p.is_origin()) return q.r;
    if (q.is_origin()) return p.r;
    const double gap = angle_dist(geom, p.theta, q.theta);
    if (gap >= kPi) return p.r + q.r;
    // (r - r')^2 + 4 r r' sin^2(gap / 2): no cancellation for nearby points.
    const double dr = p.r - q.r;
    const double h = std::sin(0.5 * gap);
    return std::sqrt(dr * dr + 4.0 * p.r * q.r * h * h);
}

/// Folding map about `center`: unrolls the visible part and collapses
/// the closed shadow onto the negative horizontal axis.
inline PlanePoint fold(const ConeGeometry& geom, double center, const KalePoint& p) noexcept {
    if (p.is_origin()) return {0.0, 0.0};
    const OffsetInfo off = classify_offset(geom, center, p.theta);
    if (off.kind != Offset::Visible) return {-p.r, 0.0};
    return {p.r * std::cos(off.value), p.r * std::sin(off.value)};
}

enum class VisibilityClass { FullyVisible, PartlyVisible, Invisible };

inline VisibilityClass visibility(const ConeGeometry& geom, double center, const KalePoint& p) noexcept {
    if (p.is_origin()) return VisibilityClass::FullyVisible;
    switch (classify_offset(geom, center, p.theta).kind) {
    case Offset::Visible: return VisibilityClass::FullyVisible;
    case Offset::Shadow: return VisibilityClass::Invisible;
    default: return VisibilityClass::PartlyVisible;
    }
}

/// Membership in the shadow closed on the +pi side.
inline bool in_shadow_plus(const ConeGeometry& geom, double center, const KalePoint& p) noexcept {
    if (p.is_origin()) return false;
    const Offset k = classify_offset(geom, center, p.theta).kind;
    return k == Offset::Shadow || k == Offset::PlusPi;
}

/// Membership in the shadow closed on the -pi side.
inline bool in_shadow_minus(const ConeGeometry& geom, double center, const KalePoint& p) noexcept {
    if (p.is_origin()) return false;
    const Offset k = classify_offset(geom, center, p.theta).kind;
    return k == Offset::Shadow || k == Offset::MinusPi;
}

inline PlanePoint rotate(double sigma, PlanePoint z) noexcept {
    const double c = std::cos(sigma);
    const double s = std::sin(sigma);
    return {c * z.z1 - s * z.z2, s * z.z1 + c * z.z2};
}

/// Nearest point of the closed sector {|angle| <= rho} of the plane.
inline PlanePoint convex_project(double rho, PlanePoint q) {
    if (!(rho >= 0.0 && rho < kHalfPi)) throw InvalidRho(rho);
    if (q.z1 == 0.0 && q.z2 == 0.0) return q;
    const double phi = std::atan2(q.z2, q.z1);
    if (std::abs(phi) <= rho) return q;
    if (std::abs(phi) >= rho + kHalfPi) return {0.0, 0.0};
    const PlanePoint edge{std::cos(rho), phi > 0.0 ? std::sin(rho) : -std::sin(rho)};
    return dot(q, edge) * edge;
}

/// Closed interval of angles [lo, lo + length] (or [lo + length, lo] when
/// length is negative), |length| <= pi.
class AngleInterval {
public:
    AngleInterval(const ConeGeometry& geom, double lo, double length) : lo_(geom.canonical(lo)), length_(length) {
        if (!std::isfinite(length) || std::abs(length) > kPi) {
            throw InputError("angle interval length must lie in [-pi, pi]");
        }
    }

    static AngleInterval from_endpoints(const ConeGeometry& geom, double lo, double hi) {
        return {geom, lo, signed_diff(geom, hi, lo)};
    }

    static AngleInterval centered(const ConeGeometry& geom, double center, double half_width) {
        return {geom, center - half_width, 2.0 * half_width};
    }

    double lo() const noexcept { return lo_; }
    double signed_length() const noexcept { return length_; }
    double length() const noexcept { return std::abs(length_); }

    /// Endpoint reached first when sweeping in the increasing direction.
    double start(const ConeGeometry& geom) const noexcept {
        return length_ >= 0.0 ? lo_ : geom.canonical(lo_ + length_);
    }
    double end(const ConeGeometry& geom) const noexcept { return geom.canonical(start(geom) + length()); }
    double midpoint(const ConeGeometry& geom) const noexcept {
        return geom.canonical(start(geom) + 0.5 * length());
    }

    bool contains_angle(const ConeGeometry& geom, double theta, double tol) const noexcept {
        const double d = geom.canonical(theta - start(geom));
        return d <= length() + tol || d >= geom.alpha() - tol;
    }

private:
    double lo_;
    double length_;
};

/// Membership in the closed sector over I; the origin is always inside.
inline bool sector_contains(const ConeGeometry& geom, const AngleInterval& interval, const KalePoint& p,
                            double tol = -1.0) noexcept {
    if (p.is_origin()) return true;
    return interval.contains_angle(geom, p.theta, tol < 0.0 ? geom.boundary_tolerance() : tol);
}

/// Same as sector_contains with the origin removed.
inline bool sector_contains_punctured(const ConeGeometry& geom, const AngleInterval& interval, const KalePoint& p,
                                      double tol = -1.0) noexcept {
    return !p.is_origin() && sector_contains(geom, interval, p, tol);
}

} // namespace kale
