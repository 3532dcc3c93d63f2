#ifndef SWEEPVEL_INTEGRATE_HPP
#define SWEEPVEL_INTEGRATE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "sweepvel/moving_sets.hpp"
#include "sweepvel/operators.hpp"
#include "sweepvel/time_function.hpp"
#include "sweepvel/vi.hpp"

namespace sweepvel {

/// Full instance of the sweeping process with velocity constraint:
/// find absolutely continuous u with u(0) = u0 and
///   A1 u'(t) + A0 u(t) - f(t) in -N_{C(t)}(u'(t))   a.e. on [0, T].
struct ProblemSpec {
    SymmetricOperator A0;
    SymmetricOperator A1;
    TimeFunction f;
    MovingSet C;
    Vec u0;
    double T;
    /// Whether u0 lies in C(0) (within 1e-9). Solving is permitted either
    /// way; the theorem checks in the analysis module require it.
    bool u0_in_C0;

    ProblemSpec(SymmetricOperator a0, SymmetricOperator a1, TimeFunction forcing, MovingSet c,
                Vec initial, double horizon)
        : A0(std::move(a0)), A1(std::move(a1)), f(std::move(forcing)), C(std::move(c)),
          u0(std::move(initial)), T(horizon), u0_in_C0(false) {
        const std::size_t n = A0.dim();
        if (A1.dim() != n || f.dim() != n || C.dim() != n || u0.size() != n)
            throw DimensionMismatch("problem spec: inconsistent dimensions");
        if (!(T > 0.0)) throw InvariantViolation("problem spec: T must be positive");
        if (C.horizon() < T)
            throw InvariantViolation("problem spec: moving set horizon shorter than T");
        u0_in_C0 = contains(C.at(0.0), u0, 1e-9);
    }

    std::size_t dim() const { return A0.dim(); }
};

/// Discrete solution on the uniform grid t_k = k h, h = T/N. Velocities are
/// attached to right endpoints: v_k is constant on (t_{k-1}, t_k] and the
/// states obey u_k = u_{k-1} + h v_k. The piecewise-linear interpolant of the
/// states is the absolutely continuous solution candidate.
struct Trajectory {
    std::vector<double> times;      // size N+1
    std::vector<Vec> states;        // size N+1
    std::vector<Vec> velocities;    // size N, velocities[k-1] = v_k
    std::vector<double> residuals;  // per-step solver residuals; empty when hand-built

    std::size_t steps() const { return velocities.size(); }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }
    double h() const { return steps() == 0 ? 0.0 : times[1] - times[0]; }

    /// Builds the trajectory the same way the solver does: exact state update
    /// u_k = u_{k-1} + h v_k on the uniform grid.
    static Trajectory from_velocities(const Vec& u0, double T, const std::vector<Vec>& velocities) {
        if (velocities.empty()) throw InvariantViolation("trajectory needs at least one step");
        const std::size_t n_steps = velocities.size();
        const double h = T / static_cast<double>(n_steps);
        Trajectory traj;
        traj.times.resize(n_steps + 1);
        traj.states.reserve(n_steps + 1);
        traj.states.push_back(u0);
        traj.velocities = velocities;
        for (std::size_t k = 0; k <= n_steps; ++k)
            traj.times[k] = static_cast<double>(k) * h;
        for (std::size_t k = 1; k <= n_steps; ++k) {
            require_same_dim(u0, velocities[k - 1], "from_velocities");
            traj.states.push_back(axpy(traj.states[k - 1], h, velocities[k - 1]));
        }
        return traj;
    }

    void validate_shape() const {
        if (times.size() < 2 || states.size() != times.size() ||
            velocities.size() + 1 != times.size())
            throw GridMismatch("trajectory arrays are inconsistent");
        if (!residuals.empty() && residuals.size() != velocities.size())
            throw GridMismatch("trajectory residual array is inconsistent");
    }
};

inline void require_shared_grid(const Trajectory& a, const Trajectory& b) {
    a.validate_shape();
    b.validate_shape();
    if (a.times != b.times) throw GridMismatch("trajectories live on different grids");
}

/// Implicit catching-up scheme. Each step solves the VI with
///   M = A1 + h A0,  q = A0 u_{k-1} - f(t_k),  S = C(t_k),
/// then updates u_k = u_{k-1} + h v_k. The composite operator keeps the step
/// strongly monotone whenever A1 or A0 is coercive, since
/// lambda_min(A1 + h A0) >= lambda_min(A1) + h lambda_min(A0).
inline Trajectory solve(const ProblemSpec& spec, std::size_t n_steps,
                        const VISolveConfig& cfg = {}) {
    if (n_steps < 1) throw InvariantViolation("solve: need at least one step");
    cfg.validate();
    const double h = spec.T / static_cast<double>(n_steps);
    const SymmetricOperator m = spec.A1.plus_scaled(h, spec.A0);

    Trajectory traj;
    traj.times.resize(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) traj.times[k] = static_cast<double>(k) * h;
    traj.states.reserve(n_steps + 1);
    traj.states.push_back(spec.u0);
    traj.velocities.reserve(n_steps);
    traj.residuals.reserve(n_steps);

    VISolveConfig step_cfg = cfg;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const double tk = traj.times[k];
        const Vec q = sub(spec.A0.apply(traj.states[k - 1]), spec.f(tk));
        try {
            VIStepResult res = solve_vi(StepVI(m, q, spec.C.at(tk)), step_cfg);
            step_cfg.warm_start = res.v;  // next step starts from this velocity
            traj.states.push_back(axpy(traj.states[k - 1], h, res.v));
            traj.velocities.push_back(std::move(res.v));
            traj.residuals.push_back(res.residual);
        } catch (const NoConverge& e) {
            throw NoConverge(e.max_iter, e.residual, k);
        }
    }
    return traj;
}

struct CertifyResult {
    bool is_solution = false;
    double max_residual = 0.0;
    std::size_t worst_step = 0;  // 1-based step index of the largest residual
};

/// Checks that a candidate trajectory is a discrete solution: at every step
/// the inclusion  A1 v_k + A0 u_k - f(t_k) in -N_{C(t_k)}(v_k)  holds via the
/// projection identity (which also enforces v_k in C(t_k)), and the initial
/// state matches u0. The state enters at the right endpoint u_k, consistent
/// with the right-endpoint velocity convention of the scheme.
inline CertifyResult certify(const ProblemSpec& spec, const Trajectory& traj, double tol,
                             const ProjectionConfig& proj = {}) {
    traj.validate_shape();
    if (std::abs(traj.horizon() - spec.T) > 1e-12 * (1.0 + spec.T))
        throw GridMismatch("trajectory horizon differs from the problem horizon");

    CertifyResult result;
    result.is_solution = distance(traj.states.front(), spec.u0) <= tol;
    for (std::size_t k = 1; k < traj.times.size(); ++k) {
        const double tk = traj.times[k];
        const Vec& v = traj.velocities[k - 1];
        const ConvexSetDesc set = spec.C.at(tk);
        const Vec w = scaled(-1.0, sub(add(spec.A1.apply(v), spec.A0.apply(traj.states[k])),
                                       spec.f(tk)));
        const double membership = distance(project(set, v, proj), v);
        const double cone = distance(project(set, add(v, w), proj), v);
        const double res = std::max(membership, cone);
        if (res > result.max_residual) {
            result.max_residual = res;
            result.worst_step = k;
        }
        if (res > tol) result.is_solution = false;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Norms on trajectories
// ---------------------------------------------------------------------------

/// max over grid nodes of |u(t_k)|.
inline double c0_norm(const Trajectory& traj) {
    traj.validate_shape();
    double m = 0.0;
    for (const auto& u : traj.states) m = std::max(m, norm(u));
    return m;
}

inline double c0_distance(const Trajectory& a, const Trajectory& b) {
    require_shared_grid(a, b);
    double m = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k)
        m = std::max(m, distance(a.states[k], b.states[k]));
    return m;
}

/// Integral norm int |u| + int |u'|. The state integral uses the trapezoid
/// rule on the grid; the velocity integral is exact for the piecewise-constant
/// velocities of the interpolant.
inline double w11_norm(const Trajectory& traj) {
    traj.validate_shape();
    const double h = traj.h();
    double state_part = 0.0;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const double w = (k == 0 || k + 1 == traj.states.size()) ? 0.5 : 1.0;
        state_part += w * norm(traj.states[k]);
    }
    double velocity_part = 0.0;
    for (const auto& v : traj.velocities) velocity_part += norm(v);
    return h * state_part + h * velocity_part;
}

inline double w11_distance(const Trajectory& a, const Trajectory& b) {
    require_shared_grid(a, b);
    const double h = a.h();
    double state_part = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        const double w = (k == 0 || k + 1 == a.states.size()) ? 0.5 : 1.0;
        state_part += w * distance(a.states[k], b.states[k]);
    }
    double velocity_part = 0.0;
    for (std::size_t k = 0; k < a.velocities.size(); ++k)
        velocity_part += distance(a.velocities[k], b.velocities[k]);
    return h * state_part + h * velocity_part;
}

/// Largest velocity magnitude over the trajectory.
inline double max_velocity_norm(const Trajectory& traj) {
    double m = 0.0;
    for (const auto& v : traj.velocities) m = std::max(m, norm(v));
    return m;
}

}  // namespace sweepvel

#endif  // SWEEPVEL_INTEGRATE_HPP
