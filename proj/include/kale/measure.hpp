#pragma once

// Finite atomic measures on the kale and their folded first moments.
// Weights are stored raw; every statistic normalizes by the total weight.

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "kale/errors.hpp"
#include "kale/geometry.hpp"

namespace kale {

struct Atom {
    double weight = 0.0;
    KalePoint point;

    friend bool operator==(const Atom&, const Atom&) = default;
};

class AtomicMeasure {
public:
    AtomicMeasure(ConeGeometry geom, std::vector<Atom> atoms) : geom_(geom), atoms_(std::move(atoms)) {
        for (Atom& a : atoms_) {
            if (!std::isfinite(a.weight) || !(a.weight > 0.0)) throw InputError("atom weights must be finite and > 0");
            a.point = make_point(geom_, a.point.r, a.point.theta);
            total_ += a.weight;
        }
    }

    /// Uniform measure on the given points, one unit of weight each.
    static AtomicMeasure uniform(ConeGeometry geom, std::span<const KalePoint> points) {
        std::vector<Atom> atoms;
        atoms.reserve(points.size());
        for (const KalePoint& p : points) atoms.push_back({1.0, p});
        return {geom, std::move(atoms)};
    }

    const ConeGeometry& geometry() const noexcept { return geom_; }
    std::span<const Atom> atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    bool empty() const noexcept { return atoms_.empty(); }
    double total_weight() const noexcept { return total_; }

    /// Same atoms with every weight multiplied by `c` > 0.
    AtomicMeasure scaled(double c) const {
        std::vector<Atom> atoms = atoms_;
        for (Atom& a : atoms) a.weight *= c;
        return {geom_, std::move(atoms)};
    }

    /// (1 - eps) * this + eps * other, both normalized first.
    AtomicMeasure mixed_with(const AtomicMeasure& other, double eps) const {
        if (!(geom_ == other.geom_)) throw InputError("cannot mix measures on different cones");
        std::vector<Atom> atoms;
        atoms.reserve(atoms_.size() + other.atoms_.size());
        for (const Atom& a : atoms_) atoms.push_back({a.weight * (1.0 - eps) / total_, a.point});
        for (const Atom& a : other.atoms_) atoms.push_back({a.weight * eps / other.total_, a.point});
        return {geom_, std::move(atoms)};
    }

private:
    ConeGeometry geom_;
    std::vector<Atom> atoms_;
    double total_ = 0.0;
};

struct FoldedMoment {
    double m1 = 0.0;
    double m2 = 0.0;

    PlanePoint vec() const noexcept { return {m1, m2}; }
};

inline FoldedMoment folded_moment(const AtomicMeasure& mu, double theta) {
    if (mu.empty()) throw EmptyMeasure();
    double s1 = 0.0;
    double s2 = 0.0;
    for (const Atom& a : mu.atoms()) {
        const PlanePoint z = fold(mu.geometry(), theta, a.point);
        s1 += a.weight * z.z1;
        s2 += a.weight * z.z2;
    }
    return {s1 / mu.total_weight(), s2 / mu.total_weight()};
}

/// Radial mass of the open shadow of theta.
inline double w_shadow(const AtomicMeasure& mu, double theta) {
    if (mu.empty()) return 0.0;
    double s = 0.0;
    for (const Atom& a : mu.atoms()) {
        if (visibility(mu.geometry(), theta, a.point) == VisibilityClass::Invisible) s += a.weight * a.point.r;
    }
    return s / mu.total_weight();
}

enum class Side { Plus, Minus };

/// Radial mass of the shadow closed on one side: Plus adds the ray at
/// offset +pi, Minus the ray at offset -pi.
inline double w_pm(const AtomicMeasure& mu, double theta, Side side) {
    if (mu.empty()) return 0.0;
    double s = 0.0;
    for (const Atom& a : mu.atoms()) {
        const bool in = side == Side::Plus ? in_shadow_plus(mu.geometry(), theta, a.point)
                                           : in_shadow_minus(mu.geometry(), theta, a.point);
        if (in) s += a.weight * a.point.r;
    }
    return s / mu.total_weight();
}

/// Squared-radius variant of w_pm.  Only used to test the alternative
/// convention against simulation; the limit theory uses w_pm.
inline double w_pm_squared(const AtomicMeasure& mu, double theta, Side side) {
    if (mu.empty()) return 0.0;
    double s = 0.0;
    for (const Atom& a : mu.atoms()) {
        const bool in = side == Side::Plus ? in_shadow_plus(mu.geometry(), theta, a.point)
                                           : in_shadow_minus(mu.geometry(), theta, a.point);
        if (in) s += a.weight * a.point.r * a.point.r;
    }
    return s / mu.total_weight();
}

inline double first_radial_moment(const AtomicMeasure& mu) {
    if (mu.empty()) throw EmptyMeasure();
    double s = 0.0;
    for (const Atom& a : mu.atoms()) s += a.weight * a.point.r;
    return s / mu.total_weight();
}

inline double second_radial_moment(const AtomicMeasure& mu) {
    if (mu.empty()) throw EmptyMeasure();
    double s = 0.0;
    for (const Atom& a : mu.atoms()) s += a.weight * a.point.r * a.point.r;
    return s / mu.total_weight();
}

/// False iff all mass sits on two rays at least pi apart (or on one ray).
inline bool is_nondegenerate(const AtomicMeasure& mu) {
    const ConeGeometry& geom = mu.geometry();
    std::vector<double> angles;
    for (const Atom& a : mu.atoms()) {
        if (!a.point.is_origin()) angles.push_back(a.point.theta);
    }
    std::sort(angles.begin(), angles.end());
    const double tol = geom.boundary_tolerance();
    std::vector<double> distinct;
    for (double t : angles) {
        if (distinct.empty() || t - distinct.back() > tol) distinct.push_back(t);
    }
    if (distinct.size() > 1 && geom.alpha() - distinct.back() + distinct.front() <= tol) distinct.pop_back();
    if (distinct.size() <= 1) return false;
    if (distinct.size() == 2) return angle_dist(geom, distinct[0], distinct[1]) < kPi - tol;
    return true;
}

} // namespace kale
