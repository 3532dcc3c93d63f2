#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sweepvel/convex_sets.hpp"
#include "sweepvel/moving_sets.hpp"

using namespace sweepvel;
using Catch::Approx;

namespace {

// Dense grid search over the feasible region; the reference for intersection
// projections. Independent of the Dykstra path.
Vec grid_search_projection(const ConvexSetDesc& feasible, const Vec& x, const Vec& lo,
                           const Vec& hi, std::size_t cells, double membership_tol) {
    Vec best;
    double best_dist = std::numeric_limits<double>::infinity();
    const double sx = (hi[0] - lo[0]) / static_cast<double>(cells);
    const double sy = (hi[1] - lo[1]) / static_cast<double>(cells);
    for (std::size_t i = 0; i <= cells; ++i) {
        for (std::size_t j = 0; j <= cells; ++j) {
            const Vec p{lo[0] + sx * static_cast<double>(i), lo[1] + sy * static_cast<double>(j)};
            if (!contains(feasible, p, membership_tol)) continue;
            const double d = distance(p, x);
            if (d < best_dist) {
                best_dist = d;
                best = p;
            }
        }
    }
    REQUIRE_FALSE(best.empty());
    return best;
}

ConvexSetDesc box_ball_intersection() {
    return ConvexSetDesc::intersection(
        {ConvexSetDesc::box({-1.0, -1.0}, {1.0, 1.0}), ConvexSetDesc::ball({0.0, 0.0}, 1.2)},
        {0.0, 0.0});
}

std::vector<ConvexSetDesc> closed_form_sets() {
    return {ConvexSetDesc::whole_space(2),
            ConvexSetDesc::singleton({0.5, -0.25}),
            ConvexSetDesc::ball({0.5, 0.5}, 0.75),
            ConvexSetDesc::box({-1.0, 0.0}, {1.0, 2.0}),
            ConvexSetDesc::halfspace({1.0, 1.0}, 0.5),
            ConvexSetDesc::hyperplane({0.0, 1.0}, 1.0),
            ConvexSetDesc::affine_subspace({0.0, 0.0}, {{1.0, 0.0}})};
}

}  // namespace

TEST_CASE("closed-form projections match the worked examples") {
    CHECK(project(ConvexSetDesc::box({-1.0, -1.0}, {1.0, 1.0}), {2.0, 0.5}) == Vec{1.0, 0.5});
    const Vec p = project(ConvexSetDesc::ball({0.0, 0.0}, 1.0), {3.0, 4.0});
    CHECK(p[0] == Approx(0.6));
    CHECK(p[1] == Approx(0.8));
    CHECK(project(ConvexSetDesc::singleton({1.0, 2.0}), {9.0, 9.0}) == Vec{1.0, 2.0});
    CHECK(project(ConvexSetDesc::whole_space(2), {9.0, -9.0}) == Vec{9.0, -9.0});

    const Vec h = project(ConvexSetDesc::halfspace({1.0, 0.0}, 0.0), {2.0, 3.0});
    CHECK(h[0] == Approx(0.0).margin(1e-15));
    CHECK(h[1] == Approx(3.0));

    const Vec hp = project(ConvexSetDesc::hyperplane({0.0, 2.0}, 2.0), {5.0, 3.0});
    CHECK(hp[0] == Approx(5.0));
    CHECK(hp[1] == Approx(1.0));

    const Vec af = project(ConvexSetDesc::affine_subspace({0.0, 1.0}, {{1.0, 0.0}}), {4.0, 7.0});
    CHECK(af[0] == Approx(4.0));
    CHECK(af[1] == Approx(1.0));
}

TEST_CASE("dykstra projection agrees with the grid-search oracle") {
    const auto feasible = box_ball_intersection();
    const Vec q{2.0, 2.0};
    const Vec dykstra = project(feasible, q);
    const std::size_t cells = 480;
    const double pitch = 2.4 / static_cast<double>(cells);
    const Vec oracle = grid_search_projection(feasible, q, {-1.2, -1.2}, {1.2, 1.2}, cells, 1e-9);
    CHECK(distance(dykstra, oracle) <= pitch * std::sqrt(2.0) + 1e-3);
    // The exact projection can be no farther from q than any feasible grid point.
    CHECK(distance(q, dykstra) <= distance(q, oracle) + 1e-9);
    CHECK(contains(feasible, dykstra, 1e-8));
}

TEST_CASE("dykstra converges on a handful of random queries") {
    const auto feasible = box_ball_intersection();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int rep = 0; rep < 20; ++rep) {
        const Vec q{dist(rng), dist(rng)};
        const Vec p = project(feasible, q);
        CHECK(contains(feasible, p, 1e-8));
        // Projection onto an intersection can move no closer than the
        // projection onto any single member.
        for (const auto& member :
             {ConvexSetDesc::box({-1.0, -1.0}, {1.0, 1.0}), ConvexSetDesc::ball({0.0, 0.0}, 1.2)})
            CHECK(distance(q, p) >= distance(q, project(member, q)) - 1e-9);
    }
}

TEST_CASE("dykstra reports non-convergence when the budget is tiny") {
    const auto feasible = box_ball_intersection();
    ProjectionConfig cfg;
    cfg.tol = 1e-14;
    cfg.max_iter = 1;
    CHECK_THROWS_AS(project(feasible, {2.0, 2.0}, cfg), DykstraNoConverge);
}

TEST_CASE("intersection construction demands a genuine witness") {
    CHECK_THROWS_AS(ConvexSetDesc::intersection({ConvexSetDesc::ball({0.0, 0.0}, 1.0),
                                                 ConvexSetDesc::ball({5.0, 0.0}, 1.0)},
                                                {0.0, 0.0}),
                    InvariantViolation);
    CHECK_THROWS_AS(ConvexSetDesc::intersection({}, {0.0, 0.0}), InvariantViolation);
}

TEST_CASE("contains follows the projection distance") {
    CHECK(contains(ConvexSetDesc::ball({0.0, 0.0}, 1.0), {0.0, 0.0}, 1e-12));
    CHECK_FALSE(contains(ConvexSetDesc::box({0.0, 0.0}, {1.0, 1.0}), {1.5, 0.0}, 1e-9));
    // Boundary slack: barely outside the halfspace but within tolerance.
    CHECK(contains(ConvexSetDesc::halfspace({1.0, 0.0}, 0.0), {-1e-12, 7.0}, 1e-9));
    CHECK(contains(ConvexSetDesc::halfspace({1.0, 0.0}, 0.0), {1e-12, 7.0}, 1e-9));
}

TEST_CASE("normal cone membership on the paper's line constraint") {
    // C = R x {0}; the normal cone at any point of C is {0} x R.
    const auto line = ConvexSetDesc::affine_subspace({0.0, 0.0}, {{1.0, 0.0}});
    for (double lambda : {-2.0, 0.0, 3.0})
        for (double t : {0.0, 0.4, 1.0}) {
            CHECK(normal_cone_contains(line, {lambda, 0.0}, {0.0, -t}, 1e-12));
            CHECK(normal_cone_contains(line, {lambda, 0.0}, {0.0, t}, 1e-12));
        }
    CHECK_FALSE(normal_cone_contains(line, {1.0, 0.0}, {0.5, 0.0}, 1e-9));
}

TEST_CASE("zero vector is normal at interior points") {
    for (const auto& set : closed_form_sets()) {
        const Vec inside = project(set, {0.1, 0.6});
        CHECK(normal_cone_contains(set, inside, {0.0, 0.0}, 1e-10));
    }
}

TEST_CASE("box vertex normal cone matches sign enumeration") {
    const auto box = ConvexSetDesc::box({0.0, 0.0}, {1.0, 1.0});
    // At the corner (1,1) the normal cone is {w : w1 >= 0, w2 >= 0}.
    CHECK(normal_cone_contains(box, {1.0, 1.0}, {1.0, 2.0}, 1e-12));
    CHECK_FALSE(normal_cone_contains(box, {1.0, 1.0}, {-1.0, 2.0}, 1e-9));
    for (const double s1 : {-1.0, 1.0})
        for (const double s2 : {-1.0, 1.0}) {
            const bool expected = s1 >= 0.0 && s2 >= 0.0;
            CHECK(normal_cone_contains(box, {1.0, 1.0}, {s1, s2}, 1e-12) == expected);
        }
}

TEST_CASE("projection properties: firm nonexpansiveness and idempotence") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    auto sets = closed_form_sets();
    sets.push_back(box_ball_intersection());
    for (const auto& set : sets) {
        for (int rep = 0; rep < 100; ++rep) {
            const Vec x{dist(rng), dist(rng)};
            const Vec y{dist(rng), dist(rng)};
            const Vec px = project(set, x);
            const Vec py = project(set, y);
            const double lhs = dot(sub(px, py), sub(px, py));
            const double rhs = dot(sub(px, py), sub(x, y));
            CHECK(lhs <= rhs + 1e-9);
            CHECK(distance(project(set, px), px) <= 1e-9);
        }
    }
}

TEST_CASE("normal cone membership is scale invariant for closed forms") {
    std::mt19937_64 rng(513);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (const auto& set : closed_form_sets()) {
        for (int rep = 0; rep < 50; ++rep) {
            const Vec x = project(set, Vec{dist(rng), dist(rng)});
            const Vec w{dist(rng), dist(rng)};
            const bool base = normal_cone_contains(set, x, w, 1e-10);
            for (const double s : {0.5, 2.0, 10.0})
                CHECK(normal_cone_contains(set, x, scaled(s, w), 1e-10 * std::max(1.0, s)) == base);
        }
    }
}

TEST_CASE("moving set evaluation per family") {
    const auto ball = ConvexSetDesc::ball({0.0, 0.0}, 1.0);
    const MovingSet fixed = MovingSet::fixed(ball, 1.0);
    CHECK(fixed.at(0.7) == ball);

    const MovingSet moved(
        TranslateFamily{ConvexSetDesc::box({0.0, 0.0}, {1.0, 1.0}),
                        TimeFunction::polynomial({{0.0, 0.0}, {1.0, 0.0}})},
        1.0);
    CHECK(moved.at(0.5) == ConvexSetDesc::box({0.5, 0.0}, {1.5, 1.0}));

    const MovingSet line =
        MovingSet::fixed(ConvexSetDesc::affine_subspace({0.0, 0.0}, {{1.0, 0.0}}), 1.0);
    CHECK(line.at(0.0) == line.at(1.0));

    CHECK_THROWS_AS(fixed.at(1.5), TimeOutOfRange);
    CHECK_THROWS_AS(fixed.at(-0.1), TimeOutOfRange);
}

TEST_CASE("hausdorff distance closed forms") {
    const MovingSet fixed = MovingSet::fixed(ConvexSetDesc::ball({0.0, 0.0}, 1.0), 1.0);
    CHECK(fixed.hausdorff_distance(0.2, 0.9) == 0.0);

    const MovingSet moved(
        TranslateFamily{ConvexSetDesc::box({0.0, 0.0}, {1.0, 1.0}),
                        TimeFunction::polynomial({{0.0, 0.0}, {1.0, 0.0}})},
        1.0);
    CHECK(moved.hausdorff_distance(0.0, 1.0) == Approx(1.0));

    const MovingSet grow(
        BallPathFamily{TimeFunction::zero(2),
                       ScalarTimeFunction::polynomial({1.0, 1.0})},
        0.5);
    CHECK(grow.hausdorff_distance(0.0, 0.5) == Approx(0.5));
}

TEST_CASE("ball path hausdorff distance matches the boundary-sampling oracle") {
    const MovingSet grow(
        BallPathFamily{TimeFunction::sinusoid({0.0, 0.0}, {0.5, 0.0}, 1.0, 0.0),
                       ScalarTimeFunction::polynomial({1.0, 1.0})},
        0.5);
    const double s = 0.05, t = 0.45;
    const ConvexSetDesc cs = grow.at(s);
    const ConvexSetDesc ct = grow.at(t);
    // Sampled sup of boundary-point distances, both directions.
    auto one_sided = [&](const ConvexSetDesc& from, const ConvexSetDesc& to) {
        const auto& b = *from.get_if<Ball>();
        double sup = 0.0;
        for (int i = 0; i < 3600; ++i) {
            const double phi = 2.0 * M_PI * static_cast<double>(i) / 3600.0;
            const Vec p{b.center[0] + b.radius * std::cos(phi),
                        b.center[1] + b.radius * std::sin(phi)};
            sup = std::max(sup, distance(p, project(to, p)));
        }
        return sup;
    };
    const double sampled = std::max(one_sided(cs, ct), one_sided(ct, cs));
    const double formula = grow.hausdorff_distance(s, t);
    CHECK(formula >= sampled - 1e-9);
    CHECK(formula == Approx(sampled).margin(1e-3));
}

TEST_CASE("box path hausdorff distance matches a corner-sampling oracle") {
    const MovingSet path(
        BoxPathFamily{TimeFunction::polynomial({{-1.0, -1.0}, {0.5, 0.25}}),
                      TimeFunction::polynomial({{1.0, 1.0}, {0.0, 0.75}})},
        1.0);
    const double s = 0.0, t = 1.0;
    const ConvexSetDesc set_s = path.at(s);
    const ConvexSetDesc set_t = path.at(t);
    const auto* bs = set_s.get_if<Box>();
    const auto* bt = set_t.get_if<Box>();
    REQUIRE(bs);
    REQUIRE(bt);
    auto one_sided = [&](const Box& from, const Box& to) {
        double sup = 0.0;
        const ConvexSetDesc target = ConvexSetDesc::box(to.lo, to.hi);
        for (int i = 0; i <= 60; ++i)
            for (int j = 0; j <= 60; ++j) {
                const Vec p{from.lo[0] + (from.hi[0] - from.lo[0]) * i / 60.0,
                            from.lo[1] + (from.hi[1] - from.lo[1]) * j / 60.0};
                sup = std::max(sup, distance(p, project(target, p)));
            }
        return sup;
    };
    const double sampled = std::max(one_sided(*bs, *bt), one_sided(*bt, *bs));
    CHECK(path.hausdorff_distance(s, t) == Approx(sampled).margin(1e-9));
}

TEST_CASE("declared continuity modulus dominates sampled hausdorff distances") {
    // Translating ball with |path'| = 1, declared g(t) = t.
    const MovingSet moved(
        TranslateFamily{ConvexSetDesc::ball({0.0, 0.0}, 1.0),
                        TimeFunction::polynomial({{0.0, 0.0}, {1.0, 0.0}})},
        1.0, ScalarTimeFunction::polynomial({0.0, 1.0}));
    CHECK(moved.continuity_audit(101) <= 1e-8);

    // Growing ball r(t) = 1 + t with g(t) = t.
    const MovingSet grow(
        BallPathFamily{TimeFunction::zero(2), ScalarTimeFunction::polynomial({1.0, 1.0})},
        1.0, ScalarTimeFunction::polynomial({0.0, 1.0}));
    CHECK(grow.continuity_audit(101) <= 1e-8);

    // A modulus that is too small must be flagged.
    const MovingSet bad(
        TranslateFamily{ConvexSetDesc::ball({0.0, 0.0}, 1.0),
                        TimeFunction::polynomial({{0.0, 0.0}, {2.0, 0.0}})},
        1.0, ScalarTimeFunction::polynomial({0.0, 1.0}));
    CHECK(bad.continuity_audit(101) > 1e-3);
}

TEST_CASE("enclosing radius per variant") {
    CHECK(enclosing_radius(ConvexSetDesc::ball({3.0, 4.0}, 2.0)) == Approx(7.0));
    CHECK(enclosing_radius(ConvexSetDesc::box({-1.0, -2.0}, {1.0, 1.0})) ==
          Approx(std::sqrt(5.0)));
    CHECK(enclosing_radius(ConvexSetDesc::singleton({0.0, -2.0})) == Approx(2.0));
    CHECK(enclosing_radius(ConvexSetDesc::whole_space(2)) < 0.0);
    CHECK(enclosing_radius(ConvexSetDesc::halfspace({1.0, 0.0}, 0.0)) < 0.0);
    CHECK(enclosing_radius(box_ball_intersection()) == Approx(1.2));
}
