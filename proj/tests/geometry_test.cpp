#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace kale;
using kale::testing::random_point;
using kale::testing::test_alphas;
using kale::testing::uniform;

namespace {

const ConeGeometry g52(2.5 * kPi);
const ConeGeometry g3(3.0 * kPi);

/// Nearest point of the sector {lo <= angle <= hi} by enumerating the
/// closed-form candidates (apex, q itself, ray projections).
PlanePoint enumerate_projection(double lo, double hi, PlanePoint q) {
    PlanePoint best{0.0, 0.0};
    double best_d = q.norm();
    const double phi = std::atan2(q.z2, q.z1);
    if (phi >= lo && phi <= hi) return q;
    for (double t : {lo, hi}) {
        const PlanePoint e{std::cos(t), std::sin(t)};
        const double s = std::max(0.0, dot(q, e));
        const PlanePoint c = s * e;
        if (plane_dist(c, q) < best_d) {
            best_d = plane_dist(c, q);
            best = c;
        }
    }
    return best;
}

/// Grid search over the sector in polar coordinates.
PlanePoint grid_projection(double rho, PlanePoint q) {
    PlanePoint best{0.0, 0.0};
    double best_d = q.norm();
    for (int i = 0; i <= 400; ++i) {
        const double t = -rho + 2.0 * rho * i / 400;
        for (int j = 1; j <= 400; ++j) {
            const double r = 2.0 * j / 400;
            const PlanePoint c{r * std::cos(t), r * std::sin(t)};
            if (plane_dist(c, q) < best_d) {
                best_d = plane_dist(c, q);
                best = c;
            }
        }
    }
    return best;
}

} // namespace

TEST(ConeGeometry, RejectsAngleSumNotAboveTwoPi) {
    EXPECT_THROW(ConeGeometry{kTwoPi}, InputError);
    EXPECT_THROW(ConeGeometry(1.0), InputError);
    EXPECT_THROW(ConeGeometry(std::nan("")), InputError);
    EXPECT_NO_THROW(ConeGeometry(kTwoPi + 1e-9));
}

TEST(ConeGeometry, CanonicalRepresentativeInRange) {
    for (double x : {-100.0, -7.85, -1e-300, 0.0, 7.853981633974483, 25.0}) {
        const double c = g52.canonical(x);
        EXPECT_GE(c, 0.0);
        EXPECT_LT(c, g52.alpha());
    }
    EXPECT_EQ(g52.canonical(g52.alpha()), 0.0);
}

TEST(KalePoint, OriginStoresZeroAngle) {
    EXPECT_EQ(make_point(g52, 0.0, 3.0), KalePoint::origin());
    EXPECT_EQ(make_point(g52, 1.0, -1.0).theta, g52.canonical(-1.0));
    EXPECT_THROW(make_point(g52, -1.0, 0.0), InputError);
}

TEST(AngleDist, Examples) {
    EXPECT_NEAR(angle_dist(g3, 0.0, 2.5 * kPi), 0.5 * kPi, 1e-15);
    EXPECT_EQ(angle_dist(g52, 1.3, 1.3), 0.0);
    EXPECT_NEAR(angle_dist(g52, 0.0, 1.25 * kPi), 1.25 * kPi, 1e-15);
}

TEST(AngleDist, MatchesMinimumOverLifts) {
    Rng rng(11);
    for (double alpha : test_alphas()) {
        const ConeGeometry g(alpha);
        for (int i = 0; i < 1000; ++i) {
            const double a = uniform(rng, -20, 20);
            const double b = uniform(rng, -20, 20);
            double best = 1e300;
            for (int n = -10; n <= 10; ++n) best = std::min(best, std::abs(n * alpha + b - a));
            EXPECT_NEAR(angle_dist(g, a, b), best, 1e-12);
            EXPECT_LE(angle_dist(g, a, b), alpha / 2 + 1e-15);
        }
    }
}

TEST(SignedDiff, Examples) {
    EXPECT_NEAR(signed_diff(g52, 0.1, 0.0), 0.1, 1e-15);
    EXPECT_EQ(signed_diff(g52, 0.0, kPi), kPi);
    EXPECT_NEAR(signed_diff(g3, 2.9 * kPi, 0.0), -0.1 * kPi, 1e-14);
    EXPECT_THROW(signed_diff(g3, 1.4 * kPi, 0.0), DistanceExceedsPi);
}

TEST(SignedDiff, MagnitudeIsAngleDist) {
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        const double a = uniform(rng, 0, g3.alpha());
        const double b = uniform(rng, 0, g3.alpha());
        if (angle_dist(g3, a, b) > kPi) continue;
        EXPECT_NEAR(std::abs(signed_diff(g3, a, b)), angle_dist(g3, a, b), 1e-13);
    }
}

TEST(KaleDist, Examples) {
    EXPECT_EQ(kale_dist(g52, {1, 0}, {2, 0}), 1.0);
    EXPECT_NEAR(kale_dist(g52, {1, 0}, make_point(g52, 1, kPi)), 2.0, 1e-15);
    EXPECT_NEAR(kale_dist(g52, {1, 0}, {1, kHalfPi}), std::sqrt(2.0), 1e-15);
    EXPECT_EQ(kale_dist(g52, KalePoint::origin(), {2.5, 1.0}), 2.5);
}

TEST(KaleDist, MetricAxiomsOnRandomTriples) {
    Rng rng(13);
    for (double alpha : test_alphas()) {
        const ConeGeometry g(alpha);
        for (int i = 0; i < 2500; ++i) {
            const KalePoint p = random_point(g, rng), q = random_point(g, rng), s = random_point(g, rng);
            EXPECT_EQ(kale_dist(g, p, q), kale_dist(g, q, p));
            EXPECT_EQ(kale_dist(g, p, p), 0.0);
            EXPECT_GE(kale_dist(g, p, q) + kale_dist(g, q, s), kale_dist(g, p, s) - 1e-12);
        }
    }
}

TEST(Fold, Examples) {
    const PlanePoint z = fold(g52, 0.0, {2, kPi / 3});
    EXPECT_NEAR(z.z1, 1.0, 1e-15);
    EXPECT_NEAR(z.z2, std::sqrt(3.0), 1e-15);
    EXPECT_EQ(fold(g52, 0.0, {2, kPi + 0.3}), (PlanePoint{-2, 0}));
    EXPECT_EQ(fold(g52, 1.7, KalePoint::origin()), (PlanePoint{0, 0}));
    EXPECT_EQ(fold(g52, 0.0, {1, kPi}), (PlanePoint{-1, 0}));
}

TEST(Fold, PreservesNormAndDoesNotExpand) {
    Rng rng(14);
    for (double alpha : test_alphas()) {
        const ConeGeometry g(alpha);
        for (int i = 0; i < 2500; ++i) {
            const double c = uniform(rng, 0, alpha);
            const KalePoint p = random_point(g, rng), q = random_point(g, rng);
            const PlanePoint fp = fold(g, c, p), fq = fold(g, c, q);
            EXPECT_NEAR(fp.norm(), p.r, 1e-15 * std::max(1.0, p.r));
            EXPECT_LE(plane_dist(fp, fq), kale_dist(g, p, q) + 1e-12);
            const KalePoint on_ray{p.r, c};
            EXPECT_NEAR(plane_dist(fold(g, c, on_ray), fq), kale_dist(g, on_ray, q), 1e-12);
        }
    }
}

TEST(Visibility, Examples) {
    EXPECT_EQ(visibility(g52, 0.0, {1, kPi + 0.2}), VisibilityClass::Invisible);
    const KalePoint b{1, kPi};
    EXPECT_EQ(visibility(g52, 0.0, b), VisibilityClass::PartlyVisible);
    EXPECT_TRUE(in_shadow_plus(g52, 0.0, b));
    EXPECT_FALSE(in_shadow_minus(g52, 0.0, b));
    const KalePoint m = make_point(g52, 1, -kPi);
    EXPECT_TRUE(in_shadow_minus(g52, 0.0, m));
    EXPECT_FALSE(in_shadow_plus(g52, 0.0, m));
    EXPECT_EQ(visibility(g52, 0.0, {1, 0.5}), VisibilityClass::FullyVisible);
    EXPECT_EQ(visibility(g52, 0.0, KalePoint::origin()), VisibilityClass::FullyVisible);
}

TEST(Rotate, Examples) {
    const PlanePoint a = rotate(kHalfPi, {1, 0});
    EXPECT_NEAR(a.z1, 0.0, 1e-16);
    EXPECT_NEAR(a.z2, 1.0, 1e-16);
    EXPECT_EQ(rotate(0.0, {3, -2}), (PlanePoint{3, -2}));
    const PlanePoint b = rotate(kPi / 3, {2, 0});
    EXPECT_NEAR(b.z1, 1.0, 1e-15);
    EXPECT_NEAR(b.z2, std::sqrt(3.0), 1e-15);
}

TEST(ConvexProject, Examples) {
    const double rho = kPi / 5;
    EXPECT_EQ(convex_project(rho, {1, 0}), (PlanePoint{1, 0}));
    EXPECT_EQ(convex_project(rho, {-1, 0}), (PlanePoint{0, 0}));
    const PlanePoint up = convex_project(rho, {0, 1});
    EXPECT_NEAR(up.norm(), std::cos(3 * kPi / 10), 1e-15);
    EXPECT_NEAR(std::atan2(up.z2, up.z1), rho, 1e-15);
    EXPECT_THROW(convex_project(kHalfPi, {1, 0}), InvalidRho);
    EXPECT_THROW(convex_project(-0.1, {1, 0}), InvalidRho);
}

TEST(ConvexProject, AgreesWithGridSearch) {
    const double rho = kPi / 5;
    for (PlanePoint q : {PlanePoint{-1, 0}, PlanePoint{0, 1}, PlanePoint{0.3, -1.2}, PlanePoint{-0.2, 0.9}}) {
        const PlanePoint exact = convex_project(rho, q);
        const PlanePoint grid = grid_projection(rho, q);
        EXPECT_LE(plane_dist(exact, q), plane_dist(grid, q) + 1e-12);
        EXPECT_NEAR(plane_dist(exact, grid), 0.0, 0.01);
    }
}

TEST(ConvexProject, IdempotentAndNonExpansive) {
    Rng rng(15);
    for (int i = 0; i < 10000; ++i) {
        const double rho = uniform(rng, 0.0, kHalfPi - 1e-6);
        const PlanePoint q1{uniform(rng, -3, 3), uniform(rng, -3, 3)};
        const PlanePoint q2{uniform(rng, -3, 3), uniform(rng, -3, 3)};
        const PlanePoint p1 = convex_project(rho, q1);
        const PlanePoint p2 = convex_project(rho, q2);
        EXPECT_LE(plane_dist(convex_project(rho, p1), p1), 1e-12);
        EXPECT_LE(plane_dist(p1, p2), plane_dist(q1, q2) + 1e-12);
        EXPECT_LE(plane_dist(p1, q1), plane_dist(enumerate_projection(-rho, rho, q1), q1) + 1e-12);
    }
}

TEST(ConvexProject, CommutesWithRotation) {
    Rng rng(16);
    for (int i = 0; i < 2000; ++i) {
        const double rho = uniform(rng, 0.0, kHalfPi - 1e-6);
        const PlanePoint z{uniform(rng, -3, 3), uniform(rng, -3, 3)};
        // The sector rotated by -rho is {-2 rho <= angle <= 0}.
        const PlanePoint lhs = convex_project(rho, rotate(rho, z));
        const PlanePoint rhs = rotate(rho, enumerate_projection(-2 * rho, 0.0, z));
        EXPECT_LE(plane_dist(lhs, rhs), 1e-12);
    }
}

TEST(SectorContains, Examples) {
    const AngleInterval iv = AngleInterval::centered(g52, 0.0, kPi / 5);
    EXPECT_TRUE(sector_contains(g52, iv, KalePoint::origin()));
    EXPECT_TRUE(sector_contains(g52, iv, {1, kPi / 6}));
    EXPECT_FALSE(sector_contains(g52, iv, {1, kPi / 4}));
    EXPECT_FALSE(sector_contains_punctured(g52, iv, KalePoint::origin()));
    EXPECT_TRUE(sector_contains(g52, iv, make_point(g52, 1, -kPi / 6)));
}

TEST(AngleInterval, FromEndpointsAndLimits) {
    const AngleInterval iv = AngleInterval::from_endpoints(g52, -0.5, 0.5);
    EXPECT_NEAR(iv.signed_length(), 1.0, 1e-15);
    EXPECT_NEAR(angle_dist(g52, iv.midpoint(g52), 0.0), 0.0, 1e-15);
    EXPECT_THROW(AngleInterval(g52, 0.0, 4.0), InputError);
}
