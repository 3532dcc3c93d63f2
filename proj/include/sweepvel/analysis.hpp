#ifndef SWEEPVEL_ANALYSIS_HPP
#define SWEEPVEL_ANALYSIS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sweepvel/integrate.hpp"

namespace sweepvel {

// ---------------------------------------------------------------------------
// Internal parallelism (embarrassingly parallel experiment units)
// ---------------------------------------------------------------------------

namespace detail {

inline std::atomic<std::size_t>& thread_cap() {
    static std::atomic<std::size_t> cap{1};
    return cap;
}

}  // namespace detail

/// Caps the number of worker threads used by the experiments. The results do
/// not depend on this value; every unit writes to its own slot.
inline void set_max_threads(std::size_t n) { detail::thread_cap() = std::max<std::size_t>(1, n); }

inline std::size_t max_threads() { return detail::thread_cap(); }

/// Runs fn(0..count-1), strided across at most max_threads() workers.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(max_threads(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Solution sensitivity with respect to the initial value
// ---------------------------------------------------------------------------

enum class SensitivityMode { a0_coercive, a1_coercive };

struct SensitivityPair {
    Vec x0, y0;
    double c0_distance = 0.0;
    double ratio = 0.0;
};

/// Empirical audit of the Lipschitz dependence of the solution on u0. The
/// theoretical modulus is sqrt(|A0|/alpha0) when A0 is coercive and
/// sqrt(T |A0| / (2 alpha1)) + 1 when A1 is coercive.
struct SensitivityReport {
    SensitivityMode mode = SensitivityMode::a0_coercive;
    double modulus_theoretical = 0.0;
    std::vector<SensitivityPair> pairs;
    double max_ratio = 0.0;
    double slack = 0.05;
    bool pass = false;
};

inline SensitivityReport sensitivity_experiment(const ProblemSpec& spec,
                                                const std::vector<std::pair<Vec, Vec>>& initials,
                                                SensitivityMode mode, std::size_t n_steps,
                                                double slack = 0.05,
                                                const VISolveConfig& cfg = {}) {
    const double a0_norm = spec.A0.operator_norm();
    SensitivityReport report;
    report.mode = mode;
    report.slack = slack;
    if (mode == SensitivityMode::a0_coercive) {
        const double alpha0 = spec.A0.coercivity_modulus();
        if (!(alpha0 > 0.0))
            throw MissingConstant("sensitivity mode a0_coercive requires coercive A0");
        report.modulus_theoretical = std::sqrt(a0_norm / alpha0);
    } else {
        const double alpha1 = spec.A1.coercivity_modulus();
        if (!(alpha1 > 0.0))
            throw MissingConstant("sensitivity mode a1_coercive requires coercive A1");
        report.modulus_theoretical = std::sqrt(spec.T * a0_norm / (2.0 * alpha1)) + 1.0;
    }

    const ConvexSetDesc c0 = spec.C.at(0.0);
    for (const auto& [x0, y0] : initials) {
        if (distance(x0, y0) < 1e-12)
            throw InvariantViolation("sensitivity experiment: initial pair is degenerate");
        if (!contains(c0, x0, 1e-9) || !contains(c0, y0, 1e-9))
            throw InvariantViolation("sensitivity experiment: initial point outside C(0)");
    }

    report.pairs.resize(initials.size());
    parallel_for(initials.size(), [&](std::size_t i) {
        const auto& [x0, y0] = initials[i];
        ProblemSpec sx(spec.A0, spec.A1, spec.f, spec.C, x0, spec.T);
        ProblemSpec sy(spec.A0, spec.A1, spec.f, spec.C, y0, spec.T);
        const Trajectory tx = solve(sx, n_steps, cfg);
        const Trajectory ty = solve(sy, n_steps, cfg);
        SensitivityPair& rec = report.pairs[i];
        rec.x0 = x0;
        rec.y0 = y0;
        rec.c0_distance = c0_distance(tx, ty);
        rec.ratio = rec.c0_distance / distance(x0, y0);
    });

    report.max_ratio = 0.0;
    for (const auto& rec : report.pairs) report.max_ratio = std::max(report.max_ratio, rec.ratio);
    report.pass = report.max_ratio <= report.modulus_theoretical * (1.0 + slack);
    return report;
}

// ---------------------------------------------------------------------------
// Gronwall-type lemma
// ---------------------------------------------------------------------------

/// (a/b)(exp(bt) - 1): the bound on int_0^t f when f(t) <= a + b int_0^t f.
inline double gronwall_bound(double a, double b, double t) {
    if (b == 0.0) throw InvariantViolation("gronwall_bound: b must be nonzero");
    return a / b * (std::exp(b * t) - 1.0);
}

struct GronwallCheck {
    bool hypothesis_holds = false;
    bool conclusion_holds = false;
    double max_hypothesis_gap = 0.0;  // max of f - (a + b int f); negative when satisfied
    double max_conclusion_gap = 0.0;  // max of int f - bound
};

/// Numeric audit of the lemma on uniform samples of f over [0, horizon]:
/// cumulative trapezoid integrals, pointwise checks with tolerance
/// 1e-6 (1 + |a|). The conclusion is only meaningful when the hypothesis
/// holds, but both flags are always reported.
inline GronwallCheck check_gronwall(const std::vector<double>& f_samples, double horizon,
                                    double a, double b) {
    if (f_samples.size() < 2)
        throw InvariantViolation("check_gronwall: need at least two samples");
    if (b == 0.0) throw InvariantViolation("check_gronwall: b must be nonzero");
    const double h = horizon / static_cast<double>(f_samples.size() - 1);
    const double tol = 1e-6 * (1.0 + std::abs(a));

    GronwallCheck check;
    check.hypothesis_holds = true;
    check.conclusion_holds = true;
    check.max_hypothesis_gap = -std::numeric_limits<double>::infinity();
    check.max_conclusion_gap = -std::numeric_limits<double>::infinity();
    double integral = 0.0;
    for (std::size_t i = 0; i < f_samples.size(); ++i) {
        if (i > 0) integral += 0.5 * h * (f_samples[i - 1] + f_samples[i]);
        const double t = h * static_cast<double>(i);
        const double hyp_gap = f_samples[i] - (a + b * integral);
        const double con_gap = integral - gronwall_bound(a, b, t);
        check.max_hypothesis_gap = std::max(check.max_hypothesis_gap, hyp_gap);
        check.max_conclusion_gap = std::max(check.max_conclusion_gap, con_gap);
        if (hyp_gap > tol) check.hypothesis_holds = false;
        if (con_gap > tol) check.conclusion_holds = false;
    }
    return check;
}

// ---------------------------------------------------------------------------
// Boundedness of the solution set
// ---------------------------------------------------------------------------

enum class BoundMode { h3a, h3b, h3c };

struct BoundParams {
    std::size_t n_steps = 1000;
    VISolveConfig solver;
    double slack = 1e-8;
    std::size_t sample_grid = 1001;        // evaluation grid for g and |f|_C0
    std::optional<double> rho0;            // radius of C(0) when not computable
    std::optional<double> c1_hat, c2_hat;  // A1 lower-bound constants on C(t)
    std::optional<double> beta;            // overrides the moving set's declared beta (h3c)
    double eps = 0.01;                     // the arbitrary eps in beta's formula (h3b)
};

/// Theorem-check record for the boundedness results. The bound fields follow
/// the statements exactly: h3a uses rho = rho0 + max|g(0)-g(s)| and the bound
/// |u0| + rho T; h3b/h3c use gamma = max{(beta|A1| + |f|_C0)/c1, |A0|/c1} and
/// the bound |u0| + (1+|u0|)(exp(gamma T) - 1).
struct BoundReport {
    BoundMode mode = BoundMode::h3a;
    std::optional<double> rho0, rho, beta, gamma, c1_hat, c2_hat;
    double bound = 0.0;          // C0 bound
    double velocity_bound = 0.0; // h3a: rho; h3b/h3c: gamma (1 + |u(t)|) pointwise
    double w11_bound = 0.0;
    double observed_c0 = 0.0;
    double observed_w11 = 0.0;
    double observed_vmax = 0.0;
    bool pass = false;
};

inline BoundReport boundedness_bound(const ProblemSpec& spec, BoundMode mode,
                                     const BoundParams& params = {}) {
    BoundReport report;
    report.mode = mode;
    const double u0_norm = norm(spec.u0);

    auto sampled_max = [&](const std::function<double(double)>& fn) {
        double m = 0.0;
        for (std::size_t i = 0; i < params.sample_grid; ++i) {
            const double t =
                spec.T * static_cast<double>(i) / static_cast<double>(params.sample_grid - 1);
            m = std::max(m, fn(t));
        }
        return m;
    };

    if (mode == BoundMode::h3a) {
        double rho0;
        const double computed = enclosing_radius(spec.C.at(0.0));
        if (computed >= 0.0) rho0 = computed;
        else if (params.rho0) rho0 = *params.rho0;
        else
            throw MissingConstant("h3a: C(0) has no computable radius and rho0 was not supplied");
        if (!spec.C.continuity_modulus())
            throw MissingConstant("h3a: continuity modulus g is not declared");
        const auto& g = *spec.C.continuity_modulus();
        const double g0 = g(0.0);
        const double osc = sampled_max([&](double t) { return std::abs(g0 - g(t)); });
        report.rho0 = rho0;
        report.rho = rho0 + osc;
        report.bound = u0_norm + *report.rho * spec.T;
        report.velocity_bound = *report.rho;
        report.w11_bound = spec.T * report.bound + *report.rho * spec.T;
    } else {
        double c1, c2;
        if (params.c1_hat) {
            c1 = *params.c1_hat;
            c2 = params.c2_hat.value_or(0.0);
        } else if (spec.A1.coercivity_modulus() > 0.0) {
            c1 = spec.A1.coercivity_modulus();
            c2 = 0.0;
        } else {
            throw MissingConstant("bound: A1 is not coercive and c1_hat was not supplied");
        }
        report.c1_hat = c1;
        report.c2_hat = c2;

        double beta;
        if (mode == BoundMode::h3b) {
            if (!spec.C.continuity_modulus())
                throw MissingConstant("h3b: continuity modulus g is not declared");
            const auto& g = *spec.C.continuity_modulus();
            const double g0 = g(0.0);
            const double osc = sampled_max([&](double t) { return std::abs(g0 - g(t)); });
            beta = u0_norm + osc + params.eps;
        } else {
            if (params.beta) beta = *params.beta;
            else if (spec.C.lipschitz_beta()) beta = *spec.C.lipschitz_beta();
            else
                throw MissingConstant(
                    "h3c: the covering constant beta is non-constructive and must be supplied");
        }
        report.beta = beta;

        const double f_c0 = sampled_max([&](double t) { return norm(spec.f(t)); });
        const double gamma = std::max((beta * spec.A1.operator_norm() + f_c0) / c1,
                                      spec.A0.operator_norm() / c1);
        report.gamma = gamma;
        report.bound = u0_norm + (1.0 + u0_norm) * (std::exp(gamma * spec.T) - 1.0);
        report.w11_bound = spec.T * report.bound + (1.0 + u0_norm) * (std::exp(gamma * spec.T) - 1.0);
    }

    const Trajectory traj = solve(spec, params.n_steps, params.solver);
    report.observed_c0 = c0_norm(traj);
    report.observed_w11 = w11_norm(traj);
    report.observed_vmax = max_velocity_norm(traj);

    bool ok = report.observed_c0 <= report.bound + params.slack &&
              report.observed_w11 <= report.w11_bound + params.slack;
    if (mode == BoundMode::h3a) {
        ok = ok && report.observed_vmax <= report.velocity_bound + params.slack;
    } else {
        // Pointwise velocity audit |v_k| <= gamma (1 + |u|) with u between the
        // panel endpoints; the gamma h |v_k| term accounts for that slack.
        const double gamma = *report.gamma;
        const double h = traj.h();
        for (std::size_t k = 1; k < traj.times.size(); ++k) {
            const double vk = norm(traj.velocities[k - 1]);
            const double uk1 = norm(traj.states[k - 1]);
            if (vk > gamma * (1.0 + uk1) + gamma * h * vk + params.slack) {
                ok = false;
                break;
            }
        }
        report.velocity_bound = gamma * (1.0 + report.observed_c0);
    }
    report.pass = ok;
    return report;
}

// ---------------------------------------------------------------------------
// Convexity of the solution set (A0 = 0)
// ---------------------------------------------------------------------------

struct ConvexityReport {
    std::vector<double> lambdas;
    std::vector<double> blend_residuals;  // certify max residual per lambda
    double tol = 0.0;
    bool pass = false;
};

/// The testable form of solution-set convexity when A0 = 0: for certified u, v
/// with the same initial value, every velocity blend (1-l) u' + l v'
/// integrates to another certified solution.
inline ConvexityReport convexity_check(const ProblemSpec& spec, const Trajectory& u,
                                       const Trajectory& v, const std::vector<double>& lambdas,
                                       double tol = 1e-9) {
    if (!spec.A0.is_zero())
        throw InvariantViolation("convexity_check requires A0 = 0 (theorem hypothesis)");
    require_shared_grid(u, v);
    if (distance(u.states.front(), v.states.front()) > tol)
        throw InvariantViolation("convexity_check: trajectories start from different u0");
    const CertifyResult cu = certify(spec, u, tol);
    const CertifyResult cv = certify(spec, v, tol);
    if (!cu.is_solution || !cv.is_solution)
        throw InvariantViolation("convexity_check: inputs must be certified solutions");

    ConvexityReport report;
    report.lambdas = lambdas;
    report.tol = tol;
    report.blend_residuals.resize(lambdas.size());
    std::vector<char> ok(lambdas.size(), 0);
    parallel_for(lambdas.size(), [&](std::size_t i) {
        const double l = lambdas[i];
        std::vector<Vec> blended(u.velocities.size());
        for (std::size_t k = 0; k < blended.size(); ++k)
            blended[k] = add(scaled(1.0 - l, u.velocities[k]), scaled(l, v.velocities[k]));
        const Trajectory w = Trajectory::from_velocities(u.states.front(), spec.T, blended);
        const CertifyResult cw = certify(spec, w, tol);
        report.blend_residuals[i] = cw.max_residual;
        ok[i] = cw.is_solution ? 1 : 0;
    });
    report.pass = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
    return report;
}

// ---------------------------------------------------------------------------
// Outer estimate Sol(P, u0) subset u + K
// ---------------------------------------------------------------------------

/// Discrete membership of v - u in the set K built from u: the difference
/// vanishes at t = 0 and every velocity difference lies in ker A0. (The other
/// K requirement, velocities staying in C(t), is already part of both
/// trajectories' certification.)
inline bool kernel_set_membership(const ProblemSpec& spec, const Trajectory& u,
                                  const Trajectory& v, double tol) {
    require_shared_grid(u, v);
    if (distance(u.states.front(), v.states.front()) > tol) return false;
    for (std::size_t k = 0; k < u.velocities.size(); ++k) {
        const Vec d = sub(v.velocities[k], u.velocities[k]);
        if (norm(spec.A0.apply(d)) > tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Kernel-direction perturbations (A1 = 0 convexity theorem)
// ---------------------------------------------------------------------------

/// A grid-aligned perturbation x with x(0) = 0 whose step velocities are
/// s_k d for a unit kernel direction d, with each s_k the largest magnitude
/// keeping v_k + s_k d inside C(t_k).
struct KernelPerturbation {
    Trajectory x;                    // states of the perturbation, x(0) = 0
    Vec direction;                   // d in ker A0, unit norm
    std::vector<double> magnitudes;  // s_k per step
    bool a1_is_zero = false;
    bool f_orthogonal_to_kernel = false;  // |<f(t_k), b>| <= tol for the kernel basis
};

inline KernelPerturbation sample_kernel_perturbation(const ProblemSpec& spec, const Trajectory& u,
                                                     const Vec& d, double magnitude,
                                                     double tol = 1e-9,
                                                     const ProjectionConfig& proj = {}) {
    u.validate_shape();
    if (std::abs(norm(d) - 1.0) > 1e-10)
        throw KernelViolation("perturbation direction must have unit norm");
    const double a0_scale = std::max(1.0, spec.A0.operator_norm());
    if (norm(spec.A0.apply(d)) > 1e-10 * a0_scale)
        throw KernelViolation("perturbation direction leaves ker A0");
    if (!(magnitude >= 0.0)) throw InvariantViolation("perturbation magnitude must be >= 0");

    KernelPerturbation pert;
    pert.direction = d;
    pert.a1_is_zero = spec.A1.is_zero();

    pert.f_orthogonal_to_kernel = true;
    const auto& kernel = spec.A0.spectrum().kernel_basis;
    for (std::size_t k = 1; k < u.times.size() && pert.f_orthogonal_to_kernel; ++k) {
        const Vec fk = spec.f(u.times[k]);
        for (const auto& b : kernel)
            if (std::abs(dot(fk, b)) > tol) {
                pert.f_orthogonal_to_kernel = false;
                break;
            }
    }

    pert.magnitudes.resize(u.velocities.size());
    std::vector<Vec> xdot(u.velocities.size());
    for (std::size_t k = 0; k < u.velocities.size(); ++k) {
        const ConvexSetDesc set = spec.C.at(u.times[k + 1]);
        const Vec& v = u.velocities[k];
        auto feasible = [&](double s) { return contains(set, axpy(v, s, d), tol, proj); };
        double s = 0.0;
        if (feasible(magnitude)) {
            s = magnitude;
        } else {
            // The feasible magnitudes form an interval [0, s_max]; 20 bisection
            // rounds pin s_max well below the certification tolerance.
            double lo = 0.0, hi = magnitude;
            for (int round = 0; round < 20; ++round) {
                const double mid = 0.5 * (lo + hi);
                if (feasible(mid)) lo = mid;
                else hi = mid;
            }
            s = lo;
        }
        pert.magnitudes[k] = s;
        xdot[k] = scaled(s, d);
    }
    pert.x = Trajectory::from_velocities(zeros(spec.dim()), spec.T, xdot);
    return pert;
}

/// The trajectory u + x (states added, velocities added).
inline Trajectory apply_perturbation(const Trajectory& u, const Trajectory& x) {
    require_shared_grid(u, x);
    Trajectory out = u;
    out.residuals.clear();
    for (std::size_t k = 0; k < out.states.size(); ++k)
        out.states[k] = add(u.states[k], x.states[k]);
    for (std::size_t k = 0; k < out.velocities.size(); ++k)
        out.velocities[k] = add(u.velocities[k], x.velocities[k]);
    return out;
}

// ---------------------------------------------------------------------------
// Non-closedness of the solution set in C0
// ---------------------------------------------------------------------------

struct NonclosednessRow {
    unsigned k = 0;
    double c0_distance = 0.0;  // sup over samples of |x_k - x|
    double c0_bound = 0.0;     // the 2/k^2 bound
    double w11_norm = 0.0;     // int |x_k| + int |x_k'|
    double tv_part = 0.0;      // int |x_k'|, the divergent piece
};

struct NonclosednessTable {
    double horizon = 1.0;
    std::vector<NonclosednessRow> rows;
    bool c0_within_bound = false;
    bool w11_strictly_increasing = false;
    /// The C0 limit t^2 sin(1/t^2) is not of bounded variation, hence not
    /// absolutely continuous; recorded for the report.
    bool limit_absolutely_continuous = false;
};

namespace detail {

/// x_k agrees with t^2 sin(1/t^2) beyond 1/k and is linearly capped on
/// [0, 1/k]; the cap keeps it Lipschitz while x itself fails to be BV.
inline double nonclosedness_xk(double t, unsigned k) {
    const double cut = 1.0 / static_cast<double>(k);
    if (t <= cut) return t / static_cast<double>(k) * std::sin(static_cast<double>(k) * k);
    return t * t * std::sin(1.0 / (t * t));
}

inline double nonclosedness_x(double t) {
    if (t == 0.0) return 0.0;
    return t * t * std::sin(1.0 / (t * t));
}

}  // namespace detail

/// Reproduces the non-closedness phenomenon: the capped oscillators x_k
/// converge to x in C0 (distance <= 2/k^2) while their W11 norms keep
/// growing. Integrals over (1/k, T] are evaluated by a midpoint rule in the
/// phase variable sigma = 1/t^2, which spreads quadrature nodes uniformly
/// over the oscillations; quad_points is the panel count.
inline NonclosednessTable nonclosedness_demo(const std::vector<unsigned>& k_list,
                                             std::size_t quad_points = 4000000,
                                             double horizon = 1.0) {
    if (quad_points < 16) throw InvariantViolation("nonclosedness_demo: quad_points too small");
    NonclosednessTable table;
    table.horizon = horizon;
    table.rows.resize(k_list.size());

    parallel_for(k_list.size(), [&](std::size_t idx) {
        const unsigned k = k_list[idx];
        if (k < 2 || 1.0 / static_cast<double>(k) >= horizon)
            throw InvariantViolation("nonclosedness_demo: need 1/k < horizon");
        NonclosednessRow row;
        row.k = k;
        row.c0_bound = 2.0 / (static_cast<double>(k) * k);

        // sup |x - x_k| over [0, 1/k] (the functions agree beyond 1/k).
        const double cut = 1.0 / static_cast<double>(k);
        double sup = 0.0;
        for (std::size_t i = 0; i <= quad_points; ++i) {
            const double t = cut * static_cast<double>(i) / static_cast<double>(quad_points);
            sup = std::max(sup, std::abs(detail::nonclosedness_x(t) - detail::nonclosedness_xk(t, k)));
        }
        row.c0_distance = sup;

        // Exact contributions of the linear cap on [0, 1/k].
        const double kk = static_cast<double>(k);
        const double slope = std::abs(std::sin(kk * kk)) / kk;
        double state_integral = slope * cut * cut / 2.0;
        double tv_integral = slope * cut;

        // sigma = 1/t^2 maps (1/k, T] onto [1/T^2, k^2); in sigma,
        //   int |x_k'| dt = int |sin(s)/s^2 - cos(s)/s| ds,
        //   int |x_k|  dt = int s^(-5/2) |sin s| / 2 ds.
        const double s_lo = 1.0 / (horizon * horizon);
        const double s_hi = kk * kk;
        const double ds = (s_hi - s_lo) / static_cast<double>(quad_points);
        double tv = 0.0, st = 0.0;
        for (std::size_t i = 0; i < quad_points; ++i) {
            const double s = s_lo + (static_cast<double>(i) + 0.5) * ds;
            const double sin_s = std::sin(s);
            const double cos_s = std::cos(s);
            tv += std::abs(sin_s / (s * s) - cos_s / s);
            st += std::abs(sin_s) / (2.0 * s * s * std::sqrt(s));
        }
        tv_integral += tv * ds;
        state_integral += st * ds;

        row.tv_part = tv_integral;
        row.w11_norm = state_integral + tv_integral;
        table.rows[idx] = row;
    });

    table.c0_within_bound = true;
    table.w11_strictly_increasing = true;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].c0_distance > table.rows[i].c0_bound) table.c0_within_bound = false;
        if (i > 0 && !(table.rows[i].w11_norm > table.rows[i - 1].w11_norm))
            table.w11_strictly_increasing = false;
    }
    return table;
}

}  // namespace sweepvel

#endif  // SWEEPVEL_ANALYSIS_HPP
