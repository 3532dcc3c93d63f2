#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sweepvel/analysis.hpp"

using namespace sweepvel;
using Catch::Approx;

namespace {

ProblemSpec line_problem() {
    return ProblemSpec(SymmetricOperator::diagonal({0.0, 1.0}),
                       SymmetricOperator::diagonal({0.0, 1.0}),
                       TimeFunction::polynomial({{0.0, 0.0}, {0.0, 1.0}}),
                       MovingSet::fixed(ConvexSetDesc::affine_subspace({0.0, 0.0}, {{1.0, 0.0}}), 1.0),
                       {0.0, 0.0}, 1.0);
}

// Same constraint and forcing but A0 = 0, the convexity-theorem hypothesis.
ProblemSpec line_problem_a0_zero() {
    return ProblemSpec(SymmetricOperator::zero(2), SymmetricOperator::diagonal({0.0, 1.0}),
                       TimeFunction::polynomial({{0.0, 0.0}, {0.0, 1.0}}),
                       MovingSet::fixed(ConvexSetDesc::affine_subspace({0.0, 0.0}, {{1.0, 0.0}}), 1.0),
                       {0.0, 0.0}, 1.0);
}

Trajectory line_family_member(double lambda, std::size_t n_steps) {
    return Trajectory::from_velocities({0.0, 0.0}, 1.0,
                                       std::vector<Vec>(n_steps, Vec{lambda, 0.0}));
}

std::vector<std::pair<Vec, Vec>> ball_pairs(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    auto draw = [&]() {
        Vec p{d(rng), d(rng)};
        while (norm(p) > 1.0) p = Vec{d(rng), d(rng)};
        return p;
    };
    std::vector<std::pair<Vec, Vec>> pairs;
    pairs.reserve(count);
    while (pairs.size() < count) {
        Vec a = draw(), b = draw();
        if (distance(a, b) >= 1e-6) pairs.emplace_back(std::move(a), std::move(b));
    }
    return pairs;
}

}  // namespace

TEST_CASE("sensitivity modulus is 1 for the identity operator") {
    // A0 = I has |A0| = alpha0, so the mapping is nonexpansive.
    ProblemSpec spec(SymmetricOperator::identity(2), SymmetricOperator::zero(2),
                     TimeFunction::zero(2),
                     MovingSet::fixed(ConvexSetDesc::ball({0.0, 0.0}, 1.0), 1.0), {0.0, 0.0}, 1.0);
    const auto rep =
        sensitivity_experiment(spec, ball_pairs(6, 11), SensitivityMode::a0_coercive, 400);
    CHECK(rep.modulus_theoretical == Approx(1.0));
    CHECK(rep.pass);
    CHECK(rep.max_ratio <= 1.0 * 1.05);
}

TEST_CASE("sensitivity experiment, A0 coercive (regression baseline)") {
    ProblemSpec spec(SymmetricOperator::diagonal({2.0, 0.5}), SymmetricOperator::zero(2),
                     TimeFunction::zero(2),
                     MovingSet::fixed(ConvexSetDesc::ball({0.0, 0.0}, 1.0), 1.0), {0.0, 0.0}, 1.0);
    const auto rep =
        sensitivity_experiment(spec, ball_pairs(10, 20250810), SensitivityMode::a0_coercive, 2000);
    CHECK(rep.modulus_theoretical == Approx(2.0));
    CHECK(rep.pass);
    CHECK(rep.max_ratio <= 2.0 * 1.05);
    // Frozen from the recorded run of this exact experiment.
    CHECK(rep.max_ratio == Approx(1.003268475390).margin(1e-6));
}

TEST_CASE("sensitivity experiment, A1 coercive (regression baseline)") {
    ProblemSpec spec(SymmetricOperator::identity(2), SymmetricOperator::identity(2),
                     TimeFunction::zero(2),
                     MovingSet::fixed(ConvexSetDesc::ball({0.0, 0.0}, 1.0), 2.0), {0.0, 0.0}, 2.0);
    const auto rep =
        sensitivity_experiment(spec, ball_pairs(10, 20250810), SensitivityMode::a1_coercive, 2000);
    CHECK(rep.modulus_theoretical == Approx(2.0));  // sqrt(2*1/2) + 1
    CHECK(rep.pass);
    CHECK(rep.max_ratio == Approx(1.0).margin(1e-9));
}

TEST_CASE("sensitivity experiment rejects bad inputs") {
    ProblemSpec degenerate(SymmetricOperator::diagonal({0.0, 1.0}), SymmetricOperator::zero(2),
                           TimeFunction::zero(2),
                           MovingSet::fixed(ConvexSetDesc::ball({0.0, 0.0}, 1.0), 1.0),
                           {0.0, 0.0}, 1.0);
    CHECK_THROWS_AS(sensitivity_experiment(degenerate, ball_pairs(2, 5),
                                           SensitivityMode::a0_coercive, 10),
                    MissingConstant);

    ProblemSpec ok(SymmetricOperator::identity(2), SymmetricOperator::zero(2),
                   TimeFunction::zero(2),
                   MovingSet::fixed(ConvexSetDesc::ball({0.0, 0.0}, 1.0), 1.0), {0.0, 0.0}, 1.0);
    const std::vector<std::pair<Vec, Vec>> same = {{Vec{0.1, 0.0}, Vec{0.1, 0.0}}};
    CHECK_THROWS_AS(sensitivity_experiment(ok, same, SensitivityMode::a0_coercive, 10),
                    InvariantViolation);
    const std::vector<std::pair<Vec, Vec>> outside = {{Vec{3.0, 0.0}, Vec{0.1, 0.0}}};
    CHECK_THROWS_AS(sensitivity_experiment(ok, outside, SensitivityMode::a0_coercive, 10),
                    InvariantViolation);
}

TEST_CASE("parallel experiment matches the serial result") {
    ProblemSpec spec(SymmetricOperator::diagonal({2.0, 0.5}), SymmetricOperator::zero(2),
                     TimeFunction::zero(2),
                     MovingSet::fixed(ConvexSetDesc::ball({0.0, 0.0}, 1.0), 1.0), {0.0, 0.0}, 1.0);
    const auto pairs = ball_pairs(8, 99);
    set_max_threads(1);
    const auto serial = sensitivity_experiment(spec, pairs, SensitivityMode::a0_coercive, 300);
    set_max_threads(4);
    const auto parallel = sensitivity_experiment(spec, pairs, SensitivityMode::a0_coercive, 300);
    set_max_threads(1);
    REQUIRE(serial.pairs.size() == parallel.pairs.size());
    for (std::size_t i = 0; i < serial.pairs.size(); ++i)
        CHECK(serial.pairs[i].ratio == parallel.pairs[i].ratio);
}

TEST_CASE("gronwall bound formula") {
    CHECK(gronwall_bound(0.0, 2.0, 0.7) == 0.0);
    CHECK(gronwall_bound(1.0, 1.0, 1.0) == Approx(std::exp(1.0) - 1.0));
    CHECK_THROWS_AS(gronwall_bound(1.0, 0.0, 1.0), InvariantViolation);
}

TEST_CASE("gronwall equality case saturates the bound under quadrature") {
    for (const auto& [a, b] : {std::pair{1.0, 1.0}, std::pair{0.5, 2.0}}) {
        const std::size_t n = 20000;
        std::vector<double> samples(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
            samples[i] = a * std::exp(b * (static_cast<double>(i) / static_cast<double>(n)));
        const auto check = check_gronwall(samples, 1.0, a, b);
        CHECK(check.hypothesis_holds);
        CHECK(check.conclusion_holds);
        // Trapezoid overestimates the convex integrand, so the gap sits just
        // above zero: equality within quadrature error.
        CHECK(check.max_conclusion_gap <= 1e-8);
        CHECK(check.max_conclusion_gap >= 0.0);
    }
}

TEST_CASE("gronwall audit flags a violated hypothesis") {
    std::vector<double> flat(101, 10.0);
    const auto check = check_gronwall(flat, 1.0, 1.0, 0.01);
    CHECK_FALSE(check.hypothesis_holds);
}

TEST_CASE("gronwall audit accepts the zero function") {
    std::vector<double> zero(64, 0.0);
    const auto check = check_gronwall(zero, 1.0, 0.1, 1.0);
    CHECK(check.hypothesis_holds);
    CHECK(check.conclusion_holds);
}

TEST_CASE("boundedness h3a on a static unit ball") {
    ProblemSpec spec(SymmetricOperator::identity(2), SymmetricOperator::identity(2),
                     TimeFunction::constant({2.0, 1.0}),
                     MovingSet::fixed(ConvexSetDesc::ball({0.0, 0.0}, 1.0), 1.0,
                                       ScalarTimeFunction::zero()),
                     {0.0, 0.0}, 1.0);
    const auto rep = boundedness_bound(spec, BoundMode::h3a);
    CHECK(rep.rho0 == Approx(1.0));
    CHECK(rep.rho == Approx(1.0));
    CHECK(rep.bound == Approx(1.0));
    CHECK(rep.observed_c0 <= 1.0 + 1e-8);
    CHECK(rep.observed_vmax <= 1.0 + 1e-8);
    CHECK(rep.pass);
}

TEST_CASE("boundedness h3b reproduces the worked constants") {
    ProblemSpec spec(SymmetricOperator::identity(2), SymmetricOperator::identity(2),
                     TimeFunction::zero(2),
                     MovingSet::fixed(ConvexSetDesc::ball({0.0, 0.0}, 1.0), 1.0,
                                       ScalarTimeFunction::zero()),
                     {0.0, 0.0}, 1.0);
    const auto rep = boundedness_bound(spec, BoundMode::h3b);
    CHECK(rep.beta == Approx(0.01));
    CHECK(rep.c1_hat == Approx(1.0));
    CHECK(rep.gamma == Approx(1.0));  // max{(0.01*1+0)/1, 1/1}
    CHECK(rep.bound == Approx(std::exp(1.0) - 1.0));
    CHECK(rep.observed_c0 <= rep.bound + 1e-8);
    CHECK(rep.pass);
}

TEST_CASE("boundedness h3a is refused on the unbounded example") {
    // C(0) = R x {0} has no enclosing radius, matching the unbounded solution
    // family of the line problem.
    CHECK_THROWS_AS(boundedness_bound(line_problem(), BoundMode::h3a), MissingConstant);
}

TEST_CASE("boundedness h3c needs a user beta") {
    ProblemSpec moving(SymmetricOperator::identity(2), SymmetricOperator::identity(2),
                       TimeFunction::zero(2),
                       MovingSet(TranslateFamily{ConvexSetDesc::ball({0.0, 0.0}, 1.0),
                                                 TimeFunction::polynomial({{0.0, 0.0}, {1.0, 0.0}})},
                                 1.0),
                       {0.0, 0.0}, 1.0);
    CHECK_THROWS_AS(boundedness_bound(moving, BoundMode::h3c), MissingConstant);

    BoundParams params;
    params.beta = 3.0;  // |x_t| + kappa T <= 2 + 1, declared by the modeler
    const auto rep = boundedness_bound(moving, BoundMode::h3c, params);
    CHECK(rep.beta == Approx(3.0));
    CHECK(rep.gamma == Approx(3.0));  // max{(3*1+0)/1, 1/1}
    CHECK(rep.pass);
}

TEST_CASE("boundedness h3b requires coercive A1 or supplied constants") {
    // The line problem with a declared modulus: A1 = diag(0,1) is not
    // coercive, so c1 must come from the caller.
    ProblemSpec spec(SymmetricOperator::diagonal({0.0, 1.0}), SymmetricOperator::diagonal({0.0, 1.0}),
                     TimeFunction::polynomial({{0.0, 0.0}, {0.0, 1.0}}),
                     MovingSet::fixed(ConvexSetDesc::affine_subspace({0.0, 0.0}, {{1.0, 0.0}}), 1.0,
                                       ScalarTimeFunction::zero()),
                     {0.0, 0.0}, 1.0);
    CHECK_THROWS_AS(boundedness_bound(spec, BoundMode::h3b), MissingConstant);

    BoundParams params;
    params.c1_hat = 0.5;
    params.c2_hat = 1.0;
    const auto rep = boundedness_bound(spec, BoundMode::h3b, params);
    CHECK(rep.c2_hat == Approx(1.0));
    CHECK(rep.gamma == Approx(std::max((0.01 + 1.0) / 0.5, 2.0)));
    CHECK(rep.pass);  // the solver picks the zero selection, well inside
}

TEST_CASE("convexity check on the blend family") {
    const auto spec = line_problem_a0_zero();
    const Trajectory u = line_family_member(0.0, 200);
    const Trajectory v = line_family_member(3.0, 200);
    const auto rep = convexity_check(spec, u, v, {0.25, 0.5, 0.75}, 1e-9);
    CHECK(rep.pass);
    for (const double r : rep.blend_residuals) CHECK(r <= 1e-9);
}

TEST_CASE("convexity check is trivial for identical trajectories") {
    const auto spec = line_problem_a0_zero();
    const Trajectory u = line_family_member(1.0, 100);
    const auto rep = convexity_check(spec, u, u, {0.1, 0.9}, 1e-9);
    CHECK(rep.pass);
}

TEST_CASE("convexity check rejects nonzero A0") {
    const auto spec = line_problem();  // A0 = diag(0,1) != 0
    const Trajectory u = line_family_member(0.0, 50);
    CHECK_THROWS_AS(convexity_check(spec, u, u, {0.5}, 1e-9), InvariantViolation);
}

TEST_CASE("uniqueness consistency: warm starts do not change the solution") {
    // A1 coercive forces a unique solution; two runs from the same u0 with
    // different first-step warm starts must coincide.
    ProblemSpec spec(SymmetricOperator::zero(2), SymmetricOperator::identity(2),
                     TimeFunction::sinusoid({0.5, 0.0}, {1.0, 0.8}, 2.0, 0.3),
                     MovingSet::fixed(ConvexSetDesc::box({-1.0, -1.0}, {1.0, 1.0}), 1.0),
                     {0.2, -0.3}, 1.0);
    VISolveConfig cold;
    VISolveConfig warm;
    warm.warm_start = Vec{0.9, -0.9};
    const Trajectory a = solve(spec, 500, cold);
    const Trajectory b = solve(spec, 500, warm);
    CHECK(c0_distance(a, b) <= 1e-9);
}

TEST_CASE("outer estimate membership over the solution family") {
    const auto spec = line_problem();
    const Trajectory u = line_family_member(0.0, 100);
    CHECK(kernel_set_membership(spec, u, u, 1e-10));
    for (const double lambda : {-2.0, 0.5, 3.0})
        CHECK(kernel_set_membership(spec, u, line_family_member(lambda, 100), 1e-10));

    Trajectory tampered = line_family_member(1.0, 100);
    tampered.velocities[10] = add(tampered.velocities[10], Vec{0.0, 1.0});  // leaves ker A0
    CHECK_FALSE(kernel_set_membership(spec, u, tampered, 1e-10));

    Trajectory shifted = line_family_member(1.0, 100);
    shifted.states.front() = Vec{0.5, 0.0};  // (v-u)(0) != 0
    CHECK_FALSE(kernel_set_membership(spec, u, shifted, 1e-10));
}

namespace {

// A1 = 0, A0 = diag(0,1), f orthogonal to ker A0, velocities confined to the
// moving segment [-2,2] x {phi(t)} with phi(t) = t/4.
ProblemSpec segment_problem(bool orthogonal_forcing) {
    TimeFunction f = orthogonal_forcing
                         ? TimeFunction::sinusoid({0.0, 0.0}, {0.0, 1.0}, 1.0, 0.0)
                         : TimeFunction::constant({1.0, 0.0});
    return ProblemSpec(SymmetricOperator::diagonal({0.0, 1.0}), SymmetricOperator::zero(2),
                       std::move(f),
                       MovingSet(BoxPathFamily{TimeFunction::polynomial({{-2.0, 0.0}, {0.0, 0.25}}),
                                               TimeFunction::polynomial({{2.0, 0.0}, {0.0, 0.25}})},
                                 1.0),
                       {0.0, 0.0}, 1.0);
}

}  // namespace

TEST_CASE("kernel perturbation certifies under the theorem hypotheses") {
    const auto spec = segment_problem(true);
    const Trajectory u = solve(spec, 200);
    REQUIRE(certify(spec, u, 1e-9).is_solution);

    const auto pert = sample_kernel_perturbation(spec, u, {1.0, 0.0}, 1.0);
    CHECK(pert.a1_is_zero);
    CHECK(pert.f_orthogonal_to_kernel);
    for (const double s : pert.magnitudes) CHECK(s == Approx(1.0));
    const Trajectory shifted = apply_perturbation(u, pert.x);
    CHECK(certify(spec, shifted, 1e-9).is_solution);
}

TEST_CASE("kernel perturbation of magnitude zero is the identity") {
    const auto spec = segment_problem(true);
    const Trajectory u = solve(spec, 50);
    const auto pert = sample_kernel_perturbation(spec, u, {1.0, 0.0}, 0.0);
    const Trajectory shifted = apply_perturbation(u, pert.x);
    CHECK(c0_distance(u, shifted) == 0.0);
    CHECK(certify(spec, shifted, 1e-9).is_solution);
}

TEST_CASE("kernel perturbation bisects to the feasible boundary") {
    const auto spec = segment_problem(true);
    const Trajectory u = solve(spec, 50);
    // Magnitude beyond the box: s_k saturates at the distance to the wall.
    const auto pert = sample_kernel_perturbation(spec, u, {1.0, 0.0}, 5.0);
    for (std::size_t k = 0; k < pert.magnitudes.size(); ++k) {
        const double room = 2.0 - u.velocities[k][0];
        CHECK(pert.magnitudes[k] == Approx(room).margin(1e-5));
        CHECK(contains(spec.C.at(u.times[k + 1]),
                       axpy(u.velocities[k], pert.magnitudes[k], pert.direction), 1e-9));
    }
}

TEST_CASE("kernel perturbation flags non-orthogonal forcing") {
    const auto spec = segment_problem(false);
    const Trajectory u = solve(spec, 50);
    REQUIRE(certify(spec, u, 1e-9).is_solution);
    const auto pert = sample_kernel_perturbation(spec, u, {1.0, 0.0}, 0.5);
    CHECK_FALSE(pert.f_orthogonal_to_kernel);  // hypothesis violated, no claim made
}

TEST_CASE("kernel perturbation rejects directions outside ker A0") {
    const auto spec = segment_problem(true);
    const Trajectory u = solve(spec, 20);
    CHECK_THROWS_AS(sample_kernel_perturbation(spec, u, {0.0, 1.0}, 1.0), KernelViolation);
    CHECK_THROWS_AS(sample_kernel_perturbation(spec, u, {2.0, 0.0}, 1.0), KernelViolation);
}

TEST_CASE("perturbation blends keep the perturbation invariants") {
    // Convex combinations of two kernel perturbations of the same trajectory
    // stay valid perturbations: velocities feasible, x(0) = 0, kernel-aligned.
    const auto spec = segment_problem(true);
    const Trajectory u = solve(spec, 50);
    const auto p1 = sample_kernel_perturbation(spec, u, {1.0, 0.0}, 1.0);
    const auto p2 = sample_kernel_perturbation(spec, u, {1.0, 0.0}, 0.25);
    for (const double l : {0.25, 0.5, 0.75}) {
        std::vector<Vec> mixed(u.velocities.size());
        for (std::size_t k = 0; k < mixed.size(); ++k)
            mixed[k] = add(scaled(1.0 - l, p1.x.velocities[k]), scaled(l, p2.x.velocities[k]));
        const Trajectory x = Trajectory::from_velocities(zeros(2), spec.T, mixed);
        CHECK(norm(x.states.front()) == 0.0);
        for (std::size_t k = 0; k < mixed.size(); ++k) {
            CHECK(norm(spec.A0.apply(mixed[k])) <= 1e-10);
            CHECK(contains(spec.C.at(u.times[k + 1]), add(u.velocities[k], mixed[k]), 1e-9));
        }
        CHECK(certify(spec, apply_perturbation(u, x), 1e-9).is_solution);
    }
}

TEST_CASE("nonclosedness demo: vanishing C0 distance, growing W11 norm") {
    const auto table = nonclosedness_demo({10u, 100u, 1000u}, 2000000);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].c0_distance <= 0.02);
    for (const auto& row : table.rows) CHECK(row.c0_distance <= row.c0_bound);
    CHECK(table.c0_within_bound);
    CHECK(table.rows[0].w11_norm < table.rows[1].w11_norm);
    CHECK(table.rows[1].w11_norm < table.rows[2].w11_norm);
    CHECK(table.w11_strictly_increasing);
    CHECK_FALSE(table.limit_absolutely_continuous);
}

TEST_CASE("nonclosedness demo validates its inputs") {
    CHECK_THROWS_AS(nonclosedness_demo({1u}, 2000000), InvariantViolation);
    CHECK_THROWS_AS(nonclosedness_demo({10u}, 4), InvariantViolation);
}
