#pragma once

// Seeded simulation of empirical barycenters: trajectories, sticking
// times, rescaled fluctuations and their comparison with the limit laws.
// Every replicate owns the stream RngSpec::stream(index), so results do not
// depend on how replicates are scheduled across threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "kale/arcs.hpp"
#include "kale/errors.hpp"
#include "kale/generators.hpp"
#include "kale/geometry.hpp"
#include "kale/limits.hpp"
#include "kale/mean.hpp"
#include "kale/measure.hpp"
#include "kale/random.hpp"

namespace kale {

/// Runs body(i) for i in [0, count) on `jobs` threads.  Each index runs
/// exactly once; body must only write to slots owned by its index.
inline void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count && !failed; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

inline std::vector<KalePoint> draw_sample(const SampleableMeasure& mu, std::size_t n, Rng& rng) {
    if (n == 0) throw InputError("sample size must be >= 1");
    std::vector<KalePoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(mu.draw(rng));
    return out;
}

struct Trajectory {
    std::vector<KalePoint> barycenters;  // barycenters[n - 1] = b_n
    std::vector<KalePoint> draws;
};

/// b_1 .. b_N for the given draws, keeping the per-angle masses in a
/// sorted map that grows by one insertion per step.
inline Trajectory barycenter_trajectory(const ConeGeometry& geom, std::vector<KalePoint> draws) {
    Trajectory t;
    t.barycenters.reserve(draws.size());
    std::map<double, double> by_angle;
    std::vector<AngularMass> masses;
    for (std::size_t n = 0; n < draws.size(); ++n) {
        const KalePoint& p = draws[n];
        if (!p.is_origin()) by_angle[p.theta] += p.r;
        masses.clear();
        for (const auto& [theta, mass] : by_angle) masses.push_back({theta, mass});
        t.barycenters.push_back(barycenter_of_masses(geom, masses, static_cast<double>(n + 1)));
    }
    t.draws = std::move(draws);
    return t;
}

/// Reference implementation: recomputes each prefix from scratch.
inline Trajectory barycenter_trajectory_rebuild(const ConeGeometry& geom, std::vector<KalePoint> draws) {
    Trajectory t;
    for (std::size_t n = 1; n <= draws.size(); ++n) {
        t.barycenters.push_back(empirical_barycenter(std::span<const KalePoint>(draws.data(), n), geom));
    }
    t.draws = std::move(draws);
    return t;
}

inline Trajectory barycenter_trajectory(const SampleableMeasure& mu, std::size_t nmax, Rng& rng) {
    return barycenter_trajectory(mu.geometry(), draw_sample(mu, nmax, rng));
}

struct StickingReport {
    std::optional<std::size_t> n_star;  // empty when censored
    std::size_t nmax = 0;

    bool censored() const noexcept { return !n_star.has_value(); }
};

/// First index of the trailing run of exact origins (1-based).
inline StickingReport sticking_time(const Trajectory& traj) {
    StickingReport rep;
    rep.nmax = traj.barycenters.size();
    if (traj.barycenters.empty() || !traj.barycenters.back().is_origin()) return rep;
    std::size_t k = traj.barycenters.size();
    while (k > 0 && traj.barycenters[k - 1].is_origin()) --k;
    rep.n_star = k + 1;
    return rep;
}

/// Barycenter of n i.i.d. draws.  Atomic measures only count atom hits.
inline KalePoint sample_barycenter(const SampleableMeasure& mu, std::size_t n, Rng& rng) {
    if (n == 0) throw InputError("sample size must be >= 1");
    if (!mu.is_atomic()) {
        const std::vector<KalePoint> pts = draw_sample(mu, n, rng);
        return empirical_barycenter(pts, mu.geometry());
    }
    const AtomicMeasure& a = mu.atomic();
    std::vector<std::uint64_t> counts(a.size(), 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[mu.draw_index(rng)];
    std::vector<AngularMass> items;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const Atom& atom = a.atoms()[j];
        if (counts[j] > 0 && !atom.point.is_origin()) {
            items.push_back({atom.point.theta, static_cast<double>(counts[j]) * atom.point.r});
        }
    }
    const std::vector<AngularMass> masses = detail::merge_sorted_masses(std::move(items));
    return barycenter_of_masses(mu.geometry(), masses, static_cast<double>(n));
}

enum class RescaleMode { SectorFolded, KappaAdjusted };

struct RescaledSample {
    RescaleMode mode = RescaleMode::SectorFolded;
    std::size_t n = 0;
    std::size_t reps = 0;
    double theta_star = 0.0;
    std::vector<KalePoint> barycenters;  // b_N per replicate
    std::vector<PlanePoint> raw;         // sqrt(N) (F b_N - r* e1)
    std::vector<PlanePoint> draws;       // raw with the mode's correction applied
};

/// Kappa-adjusted version of one raw draw.
inline PlanePoint kappa_adjust(const KappaGaussian& law, PlanePoint raw) noexcept {
    return {raw.z1, (1.0 + kappa_value(law, raw.z2)) * raw.z2};
}

inline RescaledSample rescaled_sample(const SampleableMeasure& mu, const LimitLaw& law, std::size_t n,
                                      std::size_t reps, const RngSpec& spec, unsigned jobs = 1) {
    if (n == 0 || reps == 0) throw InputError("N and reps must be >= 1");
    RescaledSample out;
    out.n = n;
    out.reps = reps;
    const auto* kappa = std::get_if<KappaGaussian>(&law);
    if (kappa != nullptr) {
        out.mode = RescaleMode::KappaAdjusted;
        out.theta_star = kappa->theta_star;
    } else if (const auto* sector = std::get_if<SectorGaussian>(&law)) {
        out.theta_star = sector->theta_star;
    }
    out.barycenters.resize(reps);
    parallel_for(reps, jobs, [&](std::size_t r) {
        Rng rng = spec.stream(r);
        out.barycenters[r] = sample_barycenter(mu, n, rng);
    });
    const double scale = std::sqrt(static_cast<double>(n));
    const double r_star = kappa != nullptr ? kappa->r_star : 0.0;
    out.raw.reserve(reps);
    out.draws.reserve(reps);
    for (const KalePoint& b : out.barycenters) {
        const PlanePoint y = fold(mu.geometry(), out.theta_star, b);
        const PlanePoint raw{scale * (y.z1 - r_star), scale * y.z2};
        out.raw.push_back(raw);
        out.draws.push_back(kappa != nullptr ? kappa_adjust(*kappa, raw) : raw);
    }
    return out;
}

/// One-sample KS distance against a CDF whose left limits are given by
/// `cdf_left` (pass the same callable for continuous references).
template <class Cdf, class CdfLeft>
double ks_statistic(std::vector<double> sample, Cdf cdf, CdfLeft cdf_left) {
    if (sample.empty()) throw InputError("KS statistic needs a nonempty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < sample.size()) {
        std::size_t j = i;
        while (j < sample.size() && sample[j] == sample[i]) ++j;
        const double x = sample[i];
        d = std::max(d, std::abs(static_cast<double>(j) / n - cdf(x)));
        d = std::max(d, std::abs(cdf_left(x) - static_cast<double>(i) / n));
        i = j;
    }
    return d;
}

template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
    return ks_statistic(std::move(sample), cdf, cdf);
}

/// Two-sample KS distance.
inline double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InputError("KS statistic needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
            x = a[i];
        } else {
            x = b[j];
        }
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

inline double ks_critical_1pct(std::size_t n) noexcept { return 1.63 / std::sqrt(static_cast<double>(n)); }

/// sup over theta of |m_theta^N - m_theta| for two atomic measures, exact
/// per common arc and also sampled on a uniform grid.
inline double moment_sup_distance(const ArcDecomposition& x, const ArcDecomposition& y, std::size_t grid) {
    const ConeGeometry& geom = x.geometry();
    auto dist_at = [&](double theta) {
        const FoldedMoment a = x.moment(theta);
        const FoldedMoment b = y.moment(theta);
        return std::hypot(a.m1 - b.m1, a.m2 - b.m2);
    };
    double best = 0.0;
    for (std::size_t g = 0; g < grid; ++g) best = std::max(best, dist_at(geom.alpha() * g / grid));
    std::vector<double> cuts(x.breakpoints().begin(), x.breakpoints().end());
    cuts.insert(cuts.end(), y.breakpoints().begin(), y.breakpoints().end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = i + 1 < cuts.size() ? cuts[i + 1] : cuts[0] + geom.alpha();
        const double psi = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        const auto& ax = x.arcs()[x.arc_index(psi)];
        const auto& ay = y.arcs()[y.arc_index(psi)];
        const FoldedMoment mx = x.moment(psi);
        const FoldedMoment my = y.moment(psi);
        // On this piece the difference is R(-u) dv - (dw, 0) with u = theta - psi.
        const double dvx = (mx.m1 + ax.invisible) - (my.m1 + ay.invisible);
        const double dvy = mx.m2 - my.m2;
        const double phi = std::atan2(dvy, dvx);
        best = std::max({best, dist_at(lo), dist_at(hi)});
        for (double base : {phi, phi + kPi}) {
            for (double shift : {-kTwoPi, 0.0, kTwoPi}) {
                const double u = base + shift;
                if (std::abs(u) <= half) best = std::max(best, dist_at(psi + u));
            }
        }
    }
    return best;
}

struct MomentConvergenceRow {
    std::size_t n = 0;
    double sup_distance = 0.0;
};

/// Nested prefixes of one sample, one row per requested size.
inline std::vector<MomentConvergenceRow> uniform_moment_convergence(const AtomicMeasure& mu,
                                                                    std::span<const std::size_t> sizes,
                                                                    std::size_t grid, Rng& rng) {
    const SampleableMeasure sm(mu);
    std::size_t nmax = 0;
    for (std::size_t s : sizes) nmax = std::max(nmax, s);
    const std::vector<KalePoint> pts = draw_sample(sm, nmax, rng);
    std::vector<MomentConvergenceRow> rows;
    const std::vector<AngularMass> pop_masses = angular_masses(mu);
    if (pop_masses.empty()) {
        for (std::size_t s : sizes) rows.push_back({s, 0.0});
        return rows;
    }
    const ArcDecomposition pop(mu.geometry(), pop_masses, mu.total_weight());
    for (std::size_t s : sizes) {
        const std::vector<AngularMass> m = angular_masses(std::span<const KalePoint>(pts.data(), s));
        const ArcDecomposition emp(mu.geometry(), m, static_cast<double>(s));
        rows.push_back({s, moment_sup_distance(emp, pop, grid)});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Comparison of simulated fluctuations with the limit laws.

/// Binomial standard error of a frequency whose true value is p.
inline double binomial_se(double p, std::size_t n) noexcept {
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

struct SectorCltReport {
    std::size_t reps = 0;
    double origin_freq = 0.0;
    double edge_freq = 0.0;
    double interior_freq = 0.0;
    MassDecomposition analytic;
    double origin_se = 0.0;        // binomial SE at the analytic origin mass
    double origin_z = 0.0;         // (freq - analytic) / se
    std::optional<double> alternative_origin;
    std::optional<double> alternative_z;
    std::size_t edge_count = 0;
    double edge_ks = 0.0;
    double edge_ks_critical = 0.0;
    bool origin_within_3se = false;
    bool edge_ks_pass = false;
};

/// A nonzero b_N counts as an edge point when its angle is at least rho
/// away from theta_star; its scaled radius is compared with the edge law.
inline SectorCltReport analyze_sector_clt(const RescaledSample& s, const SectorGaussian& law,
                                          const ConeGeometry& geom,
                                          std::optional<double> alternative_origin = std::nullopt) {
    SectorCltReport rep;
    rep.reps = s.reps;
    rep.analytic = mass_decomposition(law);
    std::size_t origin = 0, interior = 0;
    std::vector<double> edge_radii;
    const double scale = std::sqrt(static_cast<double>(s.n));
    for (const KalePoint& b : s.barycenters) {
        if (b.is_origin()) {
            ++origin;
            continue;
        }
        const OffsetInfo off = classify_offset(geom, law.theta_star, b.theta);
        const double ang = off.kind == Offset::Visible ? std::abs(off.value) : kPi;
        if (ang >= law.rho) {
            edge_radii.push_back(scale * b.r);
        } else {
            ++interior;
        }
    }
    const double reps = static_cast<double>(s.reps);
    rep.origin_freq = origin / reps;
    rep.interior_freq = interior / reps;
    rep.edge_freq = edge_radii.size() / reps;
    rep.origin_se = binomial_se(rep.analytic.origin_mass, s.reps);
    rep.origin_z = (rep.origin_freq - rep.analytic.origin_mass) / rep.origin_se;
    rep.origin_within_3se = std::abs(rep.origin_z) <= 3.0;
    if (alternative_origin) {
        rep.alternative_origin = alternative_origin;
        rep.alternative_z = (rep.origin_freq - *alternative_origin) / binomial_se(*alternative_origin, s.reps);
    }
    rep.edge_count = edge_radii.size();
    if (!edge_radii.empty()) {
        rep.edge_ks = ks_statistic(edge_radii, [&](double x) { return edge_radial_cdf(law, x); });
        rep.edge_ks_critical = ks_critical_1pct(edge_radii.size());
        rep.edge_ks_pass = rep.edge_ks < rep.edge_ks_critical;
    }
    return rep;
}

/// Contraction factor of one side of the raw transverse coordinate,
/// sqrt(E[z2^2 | side] / Sigma22), with a delta-method standard error.
struct SideContraction {
    std::size_t count = 0;
    double factor = 0.0;
    double se = 0.0;
};

inline SideContraction side_contraction(std::span<const PlanePoint> raw, double s22, bool positive) {
    SideContraction c;
    double sum2 = 0.0, sum4 = 0.0;
    for (const PlanePoint& z : raw) {
        if (positive ? z.z2 > 0.0 : z.z2 < 0.0) {
            ++c.count;
            const double q = z.z2 * z.z2;
            sum2 += q;
            sum4 += q * q;
        }
    }
    if (c.count < 2 || !(s22 > 0.0)) return c;
    const double n = static_cast<double>(c.count);
    const double mean2 = sum2 / n;
    const double var2 = std::max(0.0, sum4 / n - mean2 * mean2);
    c.factor = std::sqrt(mean2 / s22);
    c.se = std::sqrt(var2 / n) / (2.0 * std::sqrt(mean2 * s22));
    return c;
}

struct KappaConvention {
    const char* name = "";
    KappaGaussian law;
    double predicted_positive = 0.0;  // 1 / (1 + w^- / r*)
    double predicted_negative = 0.0;  // 1 / (1 + w^+ / r*)
    bool matches = false;
};

struct KappaCltReport {
    std::size_t reps = 0;
    SideContraction positive;
    SideContraction negative;
    std::vector<KappaConvention> conventions;
    std::optional<std::size_t> selected;
    double ks_z1 = 0.0;
    double ks_z2 = 0.0;
    double ks_critical = 0.0;
    double z1_mean = 0.0;
    double z1_mean_se = 0.0;
    bool ks_z1_pass = false;
    bool ks_z2_pass = false;
};

inline KappaConvention make_convention(const char* name, const KappaGaussian& law) {
    KappaConvention c;
    c.name = name;
    c.law = law;
    c.predicted_positive = 1.0 / (1.0 + law.w_minus / law.r_star);
    c.predicted_negative = 1.0 / (1.0 + law.w_plus / law.r_star);
    return c;
}

/// Measures the side contraction factors of the raw draws, keeps the
/// conventions whose predictions lie within 3 SE on both sides, and runs
/// the marginal KS tests with the first matching convention (or the first
/// convention when none matches).
inline KappaCltReport analyze_kappa_clt(const RescaledSample& s, std::vector<KappaConvention> conventions) {
    if (conventions.empty()) throw InputError("at least one kappa convention is required");
    KappaCltReport rep;
    rep.reps = s.reps;
    const double s22 = conventions.front().law.sigma.s22;
    const double s11 = conventions.front().law.sigma.s11;
    rep.positive = side_contraction(s.raw, s22, true);
    rep.negative = side_contraction(s.raw, s22, false);
    for (std::size_t i = 0; i < conventions.size(); ++i) {
        KappaConvention& c = conventions[i];
        c.matches = std::abs(rep.positive.factor - c.predicted_positive) <= 3.0 * rep.positive.se &&
                    std::abs(rep.negative.factor - c.predicted_negative) <= 3.0 * rep.negative.se;
        if (c.matches && !rep.selected) rep.selected = i;
    }
    const KappaGaussian& law = conventions[rep.selected.value_or(0)].law;
    std::vector<double> z1, z2;
    double sum = 0.0;
    for (const PlanePoint& r : s.raw) {
        const PlanePoint a = kappa_adjust(law, r);
        z1.push_back(a.z1);
        z2.push_back(a.z2);
        sum += a.z1;
    }
    rep.z1_mean = sum / static_cast<double>(z1.size());
    rep.z1_mean_se = std::sqrt(s11 / static_cast<double>(z1.size()));
    const double sd1 = std::sqrt(s11);
    const double sd2 = std::sqrt(s22);
    rep.ks_z1 = ks_statistic(z1, [&](double x) { return normal_cdf(x / sd1); });
    rep.ks_z2 = ks_statistic(z2, [&](double x) { return normal_cdf(x / sd2); });
    rep.ks_critical = ks_critical_1pct(z1.size());
    rep.ks_z1_pass = rep.ks_z1 < rep.ks_critical;
    rep.ks_z2_pass = rep.ks_z2 < rep.ks_critical;
    rep.conventions = std::move(conventions);
    return rep;
}

/// Kappa law with the squared-radius shadow masses in place of w^+/-.
inline KappaGaussian squared_convention(const AtomicMeasure& mu, const KappaGaussian& law) {
    KappaGaussian alt = law;
    alt.w_plus = w_pm_squared(mu, law.theta_star, Side::Plus);
    alt.w_minus = w_pm_squared(mu, law.theta_star, Side::Minus);
    return alt;
}

struct LlnReplicate {
    KalePoint final_barycenter;
    StickingReport sticking;
};

inline std::vector<LlnReplicate> simulate_lln(const SampleableMeasure& mu, std::size_t nmax, std::size_t reps,
                                              const RngSpec& spec, unsigned jobs = 1) {
    if (nmax == 0 || reps == 0) throw InputError("N and reps must be >= 1");
    std::vector<LlnReplicate> out(reps);
    parallel_for(reps, jobs, [&](std::size_t r) {
        Rng rng = spec.stream(r);
        const Trajectory t = barycenter_trajectory(mu, nmax, rng);
        out[r] = {t.barycenters.back(), sticking_time(t)};
    });
    return out;
}

} // namespace kale
