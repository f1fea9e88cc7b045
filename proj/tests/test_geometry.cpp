#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <variant>

#include "flatlyap/geometry.hpp"
#include "flatlyap/rng.hpp"

using namespace flatlyap;

namespace {

Mobius random_mobius(RandomStream& r) {
    const double a = 0.5 + r.uniform() * 2.0, b = r.normal(), c = r.normal();
    return Mobius{a, b, c, (1.0 + b * c) / a};
}

HPoint random_point(RandomStream& r) { return {2.0 * r.normal(), std::exp(r.normal())}; }

// brute-force side test: p is separated from the basepoint by side i iff exactly
// one of them lies inside the side's Euclidean circle (or right of its line)
bool separated(const PolygonSide& s, HPoint base, HPoint p) {
    auto inside = [&](HPoint q) {
        if (s.geodesic.vertical) return q.x > s.geodesic.center;
        return std::hypot(q.x - s.geodesic.center, q.y) < s.geodesic.radius;
    };
    return inside(base) != inside(p);
}

}  // namespace

TEST(Mobius, ApplyExamples) {
    const HPoint p = mobius_apply(Mobius::identity(), {0.3, 2.0});
    EXPECT_DOUBLE_EQ(p.x, 0.3);
    EXPECT_DOUBLE_EQ(p.y, 2.0);
    const HPoint t = mobius_apply(Mobius{1, 2, 0, 1}, {0, 1});
    EXPECT_DOUBLE_EQ(t.x, 2.0);
    EXPECT_DOUBLE_EQ(t.y, 1.0);
    const HPoint inv = mobius_apply(Mobius{0, -1, 1, 0}, {0, 2});
    EXPECT_NEAR(inv.x, 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(inv.y, 0.5);
}

TEST(Mobius, DistanceExamples) {
    const HPoint p{0.4, 1.7};
    EXPECT_DOUBLE_EQ(hyperbolic_distance(p, p), 0.0);
    EXPECT_NEAR(hyperbolic_distance({0, 1}, {0, std::numbers::e}), 1.0, 1e-14);
}

TEST(Mobius, IsometryCompositionSymmetry) {
    RandomStream r(11, "geom", 0);
    for (int i = 0; i < 500; ++i) {
        const Mobius g = random_mobius(r), h = random_mobius(r);
        const HPoint p = random_point(r), q = random_point(r);
        const double d = hyperbolic_distance(p, q);
        EXPECT_NEAR(hyperbolic_distance(q, p), d, 1e-12 * (1 + d));
        EXPECT_NEAR(hyperbolic_distance(mobius_apply(g, p), mobius_apply(g, q)), d, 1e-9 * (1 + d));
        const HPoint a = mobius_apply(g * h, p), b = mobius_apply(g, mobius_apply(h, p));
        EXPECT_NEAR(a.x, b.x, 1e-9 * (1 + std::abs(b.x)));
        EXPECT_NEAR(a.y, b.y, 1e-9 * b.y);
    }
}

TEST(Mobius, CompositionKeepsUnitDeterminant) {
    RandomStream r(12, "geom", 0);
    Mobius m = Mobius::identity();
    for (int i = 0; i < 40; ++i) m = m * random_mobius(r).normalized();
    EXPECT_NEAR(m.det(), 1.0, 1e-6);
}

TEST(Mobius, DiskRoundTrip) {
    RandomStream r(13, "geom", 0);
    for (int i = 0; i < 100; ++i) {
        const HPoint p = random_point(r);
        const HPoint q = from_disk(to_disk(p));
        EXPECT_NEAR(q.x, p.x, 1e-10 * (1 + std::abs(p.x)));
        EXPECT_NEAR(q.y, p.y, 1e-10 * p.y);
    }
}

TEST(Octagon, RelationHolds) {
    const SurfaceModel s = genus2_octagon();
    const Mobius m = s.word_mobius(s.relation);
    // identity in PSL(2, R)
    const double sign = m.a > 0 ? 1.0 : -1.0;
    const Mobius lifted{sign * m.a, sign * m.b, sign * m.c, sign * m.d};
    EXPECT_LT(lifted.max_abs_diff(Mobius::identity()), 1e-8);
    EXPECT_NEAR(s.area, 4.0 * std::numbers::pi, 1e-15);
    EXPECT_TRUE(s.compact());
}

TEST(Octagon, BasepointInsideAndGeneratorImagesExit) {
    const SurfaceModel s = genus2_octagon();
    EXPECT_TRUE(std::holds_alternative<Inside>(locate(s, s.basepoint)));
    for (int g = 0; g < 4; ++g)
        for (bool inv : {false, true}) {
            const Letter l{g, inv};
            const Location loc = locate(s, mobius_apply(s.letter_mobius(l), s.basepoint));
            ASSERT_TRUE(std::holds_alternative<ExitedThroughSide>(loc));
            EXPECT_EQ(s.sides[static_cast<std::size_t>(std::get<ExitedThroughSide>(loc).side)].letter, l);
        }
}

TEST(Octagon, LocateAgreesWithBruteForceSeparation) {
    const SurfaceModel s = genus2_octagon();
    RandomStream r(14, "geom", 0);
    for (int i = 0; i < 2000; ++i) {
        const HPoint p{3.0 * r.normal(), std::exp(2.0 * r.normal())};
        int expect = -1;
        for (std::size_t k = 0; k < s.sides.size() && expect < 0; ++k)
            if (separated(s.sides[k], s.basepoint, p)) expect = static_cast<int>(k);
        EXPECT_EQ(s.exit_side(p), expect);
    }
}

TEST(Octagon, ReduceInteriorIsIdempotent) {
    const SurfaceModel s = genus2_octagon();
    const Reduction r = reduce_to_domain(s, {0.1, 1.2});
    EXPECT_TRUE(r.word.empty());
    EXPECT_EQ(r.point, (HPoint{0.1, 1.2}));
    const Reduction again = reduce_to_domain(s, reduce_to_domain(s, {2.0, 0.05}).point);
    EXPECT_TRUE(again.word.empty());
}

TEST(Octagon, ReduceSingleGenerator) {
    const SurfaceModel s = genus2_octagon();
    for (int g = 0; g < 4; ++g) {
        const Reduction r = reduce_to_domain(s, mobius_apply(s.generators[static_cast<std::size_t>(g)], s.basepoint));
        ASSERT_EQ(r.word.size(), 1u);
        EXPECT_EQ(r.word[0], (Letter{g, false}));
        EXPECT_NEAR(hyperbolic_distance(r.point, s.basepoint), 0.0, 1e-9);
    }
}

TEST(Octagon, ReduceRandomWordsReproducesMobius) {
    const SurfaceModel s = genus2_octagon();
    RandomStream r(15, "geom", 0);
    for (int i = 0; i < 300; ++i) {
        Word w;
        const int len = 1 + static_cast<int>(r() % 5);
        for (int k = 0; k < len; ++k) w.push_back({static_cast<int>(r() % 4), (r() & 1u) != 0});
        const HPoint q{0.3 * r.normal(), std::exp(0.3 * r.normal())};
        if (s.exit_side(q) >= 0) continue;
        const HPoint p = mobius_apply(s.word_mobius(w), q);
        const Reduction red = reduce_to_domain(s, p);
        EXPECT_LT(s.exit_side(red.point), 0);
        // the recovered word maps the reduced point back onto p
        EXPECT_NEAR(hyperbolic_distance(mobius_apply(s.word_mobius(red.word), red.point), p), 0.0, 1e-8);
        EXPECT_NEAR(hyperbolic_distance(red.point, q), 0.0, 1e-8);
    }
}

TEST(Octagon, UniformSamplerStaysInside) {
    const SurfaceModel s = genus2_octagon();
    RandomStream r(16, "geom", 0);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(s.exit_side(sample_uniform(s, r)), 0);
}

TEST(ThricePuncturedSphere, StructureAndReduction) {
    const SurfaceModel s = thrice_punctured_sphere();
    EXPECT_TRUE(s.relation.empty());
    EXPECT_TRUE(s.has_cusps());
    EXPECT_FALSE(s.compact());
    EXPECT_NEAR(s.area, 2.0 * std::numbers::pi, 1e-15);
    const Reduction r = reduce_to_domain(s, {4.3, 0.7});
    EXPECT_LT(s.exit_side(r.point), 0);
    EXPECT_NEAR(hyperbolic_distance(mobius_apply(s.word_mobius(r.word), r.point), {4.3, 0.7}), 0.0, 1e-10);
    EXPECT_EQ(r.word.size(), 2u);  // two translations by 2
}

TEST(FreePlane, NoSides) {
    const SurfaceModel s = free_plane();
    EXPECT_TRUE(reduce_to_domain(s, {5.0, 0.1}).word.empty());
    EXPECT_TRUE(std::holds_alternative<Inside>(locate(s, {100.0, 1e-3})));
}

TEST(Schottky, DepthOneSample) {
    SchottkyData d;
    d.pairs.push_back(symmetric_schottky_pair({2.0, 0.0}, 1.0));
    d.validate();
    const auto pts = limit_set_sample(d, 1);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_TRUE(d.pairs[0].target.contains(pts[0]));
    EXPECT_TRUE(d.pairs[0].source.contains(pts[1]));
}

TEST(Schottky, SamplesNestedAndContracting) {
    SchottkyData d;
    d.pairs.push_back(symmetric_schottky_pair({2.0, 0.0}, 1.0));
    d.pairs.push_back(symmetric_schottky_pair({0.0, 2.0}, 1.0));
    d.validate();
    std::vector<double> h;
    for (int depth = 1; depth <= 6; ++depth) {
        const auto pts = limit_set_sample(d, depth);
        EXPECT_EQ(pts.size(), static_cast<std::size_t>(4 * std::pow(3, depth - 1)));
        for (const auto& z : pts) {
            bool in = false;
            for (const auto& p : d.pairs) in = in || p.source.contains(z) || p.target.contains(z);
            EXPECT_TRUE(in);
        }
        if (depth > 1) h.push_back(hausdorff_distance(limit_set_sample(d, depth - 1), pts));
    }
    // geometric decay: successive ratios bounded away from 1
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LT(h[i], 0.8 * h[i - 1]);
}

TEST(Schottky, OverlappingDisksRejected) {
    SchottkyData d;
    d.pairs.push_back(symmetric_schottky_pair({1.0, 0.0}, 1.5));
    EXPECT_THROW(d.validate(), DomainError);
}
