#pragma once

// Built-in example measures.  The atomic ones (sector and five-point
// examples) are plain AtomicMeasures; the continuous ones are sampled by
// inverse transform and expose closed-form folded moments.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kale/errors.hpp"
#include "kale/geometry.hpp"
#include "kale/measure.hpp"
#include "kale/random.hpp"

namespace kale {

/// K equal atoms on the unit circle spaced 2*pi/K apart, centered at theta_star.
inline AtomicMeasure sector_example(int k, double theta_star, const ConeGeometry& geom) {
    if (k < 3 || k % 2 == 0) throw InputError("sector_example needs an odd K >= 3");
    std::vector<Atom> atoms;
    const int half = (k - 1) / 2;
    for (int j = -half; j <= half; ++j) {
        atoms.push_back({1.0 / k, {1.0, theta_star + kTwoPi * j / k}});
    }
    return {geom, std::move(atoms)};
}

/// Five atoms of mass 1/5: (t,0), (1,pi/2), (1,pi), (2,-pi), (1,-pi/2).
inline AtomicMeasure gaussian_example(double t, const ConeGeometry& geom) {
    if (!(t > 3.0) || !std::isfinite(t)) throw InputError("gaussian_example needs t > 3");
    const double w = 0.2;
    return {geom,
            {{w, {t, 0.0}}, {w, {1.0, kHalfPi}}, {w, {1.0, kPi}}, {w, {2.0, -kPi}}, {w, {1.0, -kHalfPi}}}};
}

/// Density proportional to 1 on r <= 1 and r^-(beta+2) beyond, uniform in angle.
struct HeavyTail {
    double beta = 1.5;

    void validate() const {
        if (!(beta > 1.0 && beta < 2.0)) throw InputError("heavy_tail needs beta in (1, 2)");
    }
    double mass_inside_unit() const noexcept { return beta / (beta + 2.0); }

    double radial_cdf(double r) const noexcept {
        if (r <= 0.0) return 0.0;
        if (r <= 1.0) return mass_inside_unit() * r * r;
        return 1.0 - 2.0 / (beta + 2.0) * std::pow(r, -beta);
    }
    double radial_quantile(double u) const noexcept {
        const double p1 = mass_inside_unit();
        if (u <= p1) return std::sqrt(u / p1);
        return std::pow((1.0 - u) * (beta + 2.0) / 2.0, -1.0 / beta);
    }
    double mean_radius() const noexcept { return 2.0 * beta / (3.0 * (beta - 1.0)); }
};

/// Uniform on the unit-radius arc of angles strictly within pi of `center`.
struct CircleArcUniform {
    double center = 0.0;
};

struct RadialLaw {
    enum class Kind { Point, Uniform, Exponential };
    Kind kind = Kind::Point;
    double a = 1.0;  // Point: radius; Uniform: low; Exponential: rate
    double b = 1.0;  // Uniform: high

    void validate() const {
        switch (kind) {
        case Kind::Point:
            if (!(a >= 0.0) || !std::isfinite(a)) throw InputError("point radius must be finite and >= 0");
            break;
        case Kind::Uniform:
            if (!(a >= 0.0 && b > a) || !std::isfinite(b)) throw InputError("uniform radial law needs 0 <= low < high");
            break;
        case Kind::Exponential:
            if (!(a > 0.0) || !std::isfinite(a)) throw InputError("exponential rate must be > 0");
            break;
        }
    }
    double mean() const noexcept {
        switch (kind) {
        case Kind::Point: return a;
        case Kind::Uniform: return 0.5 * (a + b);
        case Kind::Exponential: return 1.0 / a;
        }
        return 0.0;
    }
    double second_moment() const noexcept {
        switch (kind) {
        case Kind::Point: return a * a;
        case Kind::Uniform: return (a * a + a * b + b * b) / 3.0;
        case Kind::Exponential: return 2.0 / (a * a);
        }
        return 0.0;
    }
    double quantile(double u) const noexcept {
        switch (kind) {
        case Kind::Point: return a;
        case Kind::Uniform: return a + (b - a) * u;
        case Kind::Exponential: return -std::log1p(-u) / a;
        }
        return 0.0;
    }
};

struct SpiderLeg {
    double theta = 0.0;
    double weight = 1.0;
    RadialLaw law;
};

/// Measures carried by rays pairwise more than pi apart.
struct SpiderRays {
    std::vector<SpiderLeg> legs;
};

using GeneratorKind = std::variant<HeavyTail, CircleArcUniform, SpiderRays>;

/// Integrals over phi in [lo, lo + len) of the folded unit vector
/// F_theta(1, phi) and of its outer product with itself.
struct ArcFoldIntegrals {
    double c = 0.0, s = 0.0;            // first moment
    double cc = 0.0, cs = 0.0, ss = 0.0;  // second moment
};

inline ArcFoldIntegrals arc_fold_integrals(const ConeGeometry& geom, double theta, double lo, double len) {
    const double alpha = geom.alpha();
    const double t0 = geom.canonical(lo - theta);
    const double t1 = t0 + len;
    ArcFoldIntegrals out;
    // Visible windows in the unrolled offset coordinate, with their shift.
    const double windows[3][3] = {{0.0, kPi, 0.0}, {alpha - kPi, alpha + kPi, alpha}, {2 * alpha - kPi, 2 * alpha + kPi, 2 * alpha}};
    double visible_len = 0.0;
    for (const auto& w : windows) {
        const double a = std::max(t0, w[0]);
        const double b = std::min(t1, w[1]);
        if (!(b > a)) continue;
        const double x0 = a - w[2];
        const double x1 = b - w[2];
        visible_len += b - a;
        out.c += std::sin(x1) - std::sin(x0);
        out.s += std::cos(x0) - std::cos(x1);
        out.cc += 0.5 * (x1 - x0) + 0.25 * (std::sin(2 * x1) - std::sin(2 * x0));
        out.ss += 0.5 * (x1 - x0) - 0.25 * (std::sin(2 * x1) - std::sin(2 * x0));
        out.cs += 0.5 * (std::sin(x1) * std::sin(x1) - std::sin(x0) * std::sin(x0));
    }
    const double shadow = std::max(0.0, len - visible_len);
    out.c -= shadow;
    out.cc += shadow;
    return out;
}

/// A measure that can be sampled: either atomic or one of the continuous generators.
class SampleableMeasure {
public:
    SampleableMeasure(AtomicMeasure mu) : geom_(mu.geometry()), body_(std::move(mu)) { build_cumulative(); }

    SampleableMeasure(ConeGeometry geom, GeneratorKind gen) : geom_(geom) {
        std::visit([&](auto& g) { validate(g); }, gen);
        std::visit([&](auto&& g) { body_ = std::move(g); }, std::move(gen));
        build_cumulative();
    }

    const ConeGeometry& geometry() const noexcept { return geom_; }
    bool is_atomic() const noexcept { return std::holds_alternative<AtomicMeasure>(body_); }
    const AtomicMeasure& atomic() const { return std::get<AtomicMeasure>(body_); }

    template <class T>
    const T* get_if() const noexcept { return std::get_if<T>(&body_); }

    /// Atoms whose cumulative weights drive sampling (atomic measures only).
    std::size_t draw_index(Rng& rng) const {
        const double u = uniform01(rng) * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
    }

    KalePoint draw(Rng& rng) const {
        if (const auto* mu = std::get_if<AtomicMeasure>(&body_)) return mu->atoms()[draw_index(rng)].point;
        if (const auto* h = std::get_if<HeavyTail>(&body_)) {
            const double r = h->radial_quantile(uniform01(rng));
            const double theta = geom_.alpha() * uniform01(rng);
            return make_point(geom_, r, theta);
        }
        if (const auto* c = std::get_if<CircleArcUniform>(&body_)) {
            return make_point(geom_, 1.0, c->center - kPi + kTwoPi * uniform01(rng));
        }
        const auto& spider = std::get<SpiderRays>(body_);
        const SpiderLeg& leg = spider.legs[draw_index(rng)];
        return make_point(geom_, leg.law.quantile(uniform01(rng)), leg.theta);
    }

    double first_radial_moment() const {
        if (const auto* mu = std::get_if<AtomicMeasure>(&body_)) return kale::first_radial_moment(*mu);
        if (const auto* h = std::get_if<HeavyTail>(&body_)) return h->mean_radius();
        if (std::holds_alternative<CircleArcUniform>(body_)) return 1.0;
        return kale::first_radial_moment(moment_surrogate());
    }

    /// +infinity when the measure is not square-integrable.
    double second_radial_moment() const {
        if (const auto* mu = std::get_if<AtomicMeasure>(&body_)) return kale::second_radial_moment(*mu);
        if (std::holds_alternative<HeavyTail>(body_)) return std::numeric_limits<double>::infinity();
        if (std::holds_alternative<CircleArcUniform>(body_)) return 1.0;
        const auto& spider = std::get<SpiderRays>(body_);
        double num = 0.0, den = 0.0;
        for (const SpiderLeg& leg : spider.legs) {
            num += leg.weight * leg.law.second_moment();
            den += leg.weight;
        }
        return num / den;
    }

    bool is_square_integrable() const { return std::isfinite(second_radial_moment()); }

    /// Atomic measure with the same folded first moments.  Defined for
    /// atomic measures and spiders (radius replaced by its mean per leg).
    AtomicMeasure moment_surrogate() const {
        if (const auto* mu = std::get_if<AtomicMeasure>(&body_)) return *mu;
        if (const auto* spider = std::get_if<SpiderRays>(&body_)) {
            std::vector<Atom> atoms;
            for (const SpiderLeg& leg : spider->legs) atoms.push_back({leg.weight, {leg.law.mean(), leg.theta}});
            return {geom_, std::move(atoms)};
        }
        throw PreconditionError("continuous generator has no atomic moment surrogate");
    }

    bool has_moment_surrogate() const noexcept {
        return std::holds_alternative<AtomicMeasure>(body_) || std::holds_alternative<SpiderRays>(body_);
    }

    FoldedMoment folded_moment(double theta) const {
        if (has_moment_surrogate()) return kale::folded_moment(moment_surrogate(), theta);
        if (const auto* h = std::get_if<HeavyTail>(&body_)) {
            const ArcFoldIntegrals in = arc_fold_integrals(geom_, theta, 0.0, geom_.alpha());
            const double scale = h->mean_radius() / geom_.alpha();
            return {scale * in.c, scale * in.s};
        }
        const auto& c = std::get<CircleArcUniform>(body_);
        const ArcFoldIntegrals in = arc_fold_integrals(geom_, theta, c.center - kPi, kTwoPi);
        return {in.c / kTwoPi, in.s / kTwoPi};
    }

private:
    void validate(const HeavyTail& h) const { h.validate(); }
    void validate(const CircleArcUniform& c) const {
        if (!std::isfinite(c.center)) throw InputError("circle_arc_uniform center must be finite");
    }
    void validate(SpiderRays& s) const {
        if (s.legs.empty()) throw InputError("spider_rays needs at least one leg");
        for (SpiderLeg& leg : s.legs) {
            if (!(leg.weight > 0.0) || !std::isfinite(leg.weight)) throw InputError("spider leg weight must be > 0");
            if (!std::isfinite(leg.theta)) throw InputError("spider leg angle must be finite");
            leg.law.validate();
            leg.theta = geom_.canonical(leg.theta);
        }
        for (std::size_t i = 0; i < s.legs.size(); ++i) {
            for (std::size_t j = i + 1; j < s.legs.size(); ++j) {
                if (!(angle_dist(geom_, s.legs[i].theta, s.legs[j].theta) > kPi)) {
                    throw InputError("spider legs must be pairwise more than pi apart");
                }
            }
        }
    }

    void build_cumulative() {
        double acc = 0.0;
        if (const auto* mu = std::get_if<AtomicMeasure>(&body_)) {
            if (mu->empty()) throw EmptyMeasure();
            for (const Atom& a : mu->atoms()) cumulative_.push_back(acc += a.weight);
        } else if (const auto* s = std::get_if<SpiderRays>(&body_)) {
            for (const SpiderLeg& leg : s->legs) cumulative_.push_back(acc += leg.weight);
        }
    }

    ConeGeometry geom_;
    std::variant<AtomicMeasure, HeavyTail, CircleArcUniform, SpiderRays> body_{AtomicMeasure{geom_, {}}};
    std::vector<double> cumulative_;
};

} // namespace kale
