#pragma once

#include <cmath>
#include <vector>

#include "kale/kale.hpp"

namespace kale::testing {

inline const std::vector<double>& test_alphas() {
    static const std::vector<double> a{kTwoPi + 0.1, 2.5 * kPi, 3.0 * kPi, 10.0};
    return a;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline KalePoint random_point(const ConeGeometry& g, Rng& rng, double rmax = 3.0) {
    return make_point(g, uniform(rng, 0.0, rmax), uniform(rng, 0.0, g.alpha()));
}

/// Random atomic measure with `k` atoms of random positive weight.
inline AtomicMeasure random_measure(const ConeGeometry& g, Rng& rng, int k, double rmax = 3.0) {
    std::vector<Atom> atoms;
    for (int i = 0; i < k; ++i) atoms.push_back({uniform(rng, 0.1, 1.0), random_point(g, rng, rmax)});
    atoms.front().point.r = std::max(atoms.front().point.r, 0.5);
    return {g, std::move(atoms)};
}

/// Random nonsticky measure: a cluster of atoms within a narrow sector.
inline AtomicMeasure random_clustered(const ConeGeometry& g, Rng& rng, int k) {
    const double center = uniform(rng, 0.0, g.alpha());
    std::vector<Atom> atoms;
    for (int i = 0; i < k; ++i) {
        atoms.push_back({uniform(rng, 0.1, 1.0), make_point(g, uniform(rng, 0.5, 3.0), center + uniform(rng, -1.0, 1.0))});
    }
    return {g, std::move(atoms)};
}

inline double gridded_max_m1(const AtomicMeasure& mu, std::size_t grid, double* arg = nullptr) {
    double best = -1e300;
    for (std::size_t i = 0; i < grid; ++i) {
        const double t = mu.geometry().alpha() * i / grid;
        const double v = folded_moment(mu, t).m1;
        if (v > best) {
            best = v;
            if (arg) *arg = t;
        }
    }
    return best;
}

struct GridBarycenter {
    KalePoint point;
    double theta = 0.0;  // grid argmax of m_{theta,1}
    double max_m1 = 0.0;
    double bound = 0.0;  // distance to the true minimizer is at most this
};

/// Minimizes Gamma over a uniform theta grid with the radius in closed form,
/// evaluating m_{theta,1} atom by atom.  |m1''| <= 2 rbar gives a Gamma
/// deficit of at most rbar^2 h^2 / 4, and Gamma is 1-convex, so the grid
/// minimizer lies within rbar h / sqrt(2) of the true one.
inline GridBarycenter grid_barycenter(const AtomicMeasure& mu, std::size_t grid) {
    const double alpha = mu.geometry().alpha();
    const double h = alpha / static_cast<double>(grid);
    double total = 0.0, rbar = 0.0;
    for (const Atom& a : mu.atoms()) {
        total += a.weight;
        rbar += a.weight * a.point.r;
    }
    rbar /= total;
    GridBarycenter out;
    out.max_m1 = -1e300;
    for (std::size_t i = 0; i < grid; ++i) {
        const double t = h * static_cast<double>(i);
        double m = 0.0;
        for (const Atom& a : mu.atoms()) {
            double off = std::fmod(a.point.theta - t, alpha);
            if (off < 0.0) off += alpha;
            if (off > alpha - kPi) off -= alpha;
            m += a.weight * (std::abs(off) < kPi ? a.point.r * std::cos(off) : -a.point.r);
        }
        m /= total;
        if (m > out.max_m1) {
            out.max_m1 = m;
            out.theta = t;
        }
    }
    out.point = out.max_m1 > 0.0 ? KalePoint{out.max_m1, out.theta} : KalePoint::origin();
    out.bound = rbar * h / std::sqrt(2.0);
    return out;
}

} // namespace kale::testing
