#ifndef SWEEPVEL_VI_HPP
#define SWEEPVEL_VI_HPP

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "sweepvel/convex_sets.hpp"
#include "sweepvel/operators.hpp"

namespace sweepvel {

/// Per-time-step variational inequality: find v in S with
///   <M v + q, z - v> >= 0   for all z in S.
/// This is the per-step form the sweeping process reduces to once the
/// inclusion is written against the constraint set.
struct StepVI {
    SymmetricOperator M;
    Vec q;
    ConvexSetDesc S;

    StepVI(SymmetricOperator m, Vec drift, ConvexSetDesc set)
        : M(std::move(m)), q(std::move(drift)), S(std::move(set)) {
        if (q.size() != M.dim() || S.dim() != M.dim())
            throw DimensionMismatch("step VI: operator, drift, and set dims must agree");
    }
};

struct VISolveConfig {
    double tol = 1e-10;            // natural-map residual target
    std::size_t max_iter = 1000000;  // iteration cap per fixed-point run
    double eps0 = 1e-2;            // Tikhonov schedule eps_j = eps0 * theta^j
    double theta = 0.1;
    std::size_t stages = 6;
    std::optional<Vec> warm_start;  // initial iterate; defaults to P_S(0)
    ProjectionConfig projection;

    void validate() const {
        if (!(tol > 0.0)) throw InvariantViolation("vi config: tol must be positive");
        if (!(theta > 0.0 && theta < 1.0))
            throw InvariantViolation("vi config: theta must lie in (0,1)");
        if (!(eps0 > 0.0)) throw InvariantViolation("vi config: eps0 must be positive");
        if (stages == 0) throw InvariantViolation("vi config: need at least one stage");
    }
};

/// Outcome of one VI solve. rho is the internal step the reported residual
/// was measured at, kept with the result for reproducibility.
struct VIStepResult {
    Vec v;
    double rho = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
};

/// Natural-map residual |v - P_S(v - rho (Mv + q))|; zero exactly at VI
/// solutions, for any rho > 0.
inline double vi_residual(const StepVI& p, const Vec& v, double rho,
                          const ProjectionConfig& cfg = {}) {
    if (!(rho > 0.0)) throw InvariantViolation("vi_residual: rho must be positive");
    const Vec field = add(p.M.apply(v), p.q);
    const Vec image = project(p.S, axpy(v, -rho, field), cfg);
    return distance(v, image);
}

namespace detail {

/// Projected fixed-point iteration v <- P_S(v - rho (Mv + q)) at fixed rho.
/// Contraction with factor sqrt(1 - alpha^2/L^2) when lambda_min(M) = alpha > 0
/// and rho = alpha/L^2.
inline std::pair<Vec, std::size_t> projected_fixed_point(const SymmetricOperator& m, const Vec& q,
                                                         const ConvexSetDesc& s, double rho,
                                                         Vec v, double tol, std::size_t max_iter,
                                                         const ProjectionConfig& proj) {
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const Vec field = add(m.apply(v), q);
        Vec next = project(s, axpy(v, -rho, field), proj);
        const double move = distance(next, v);
        v = std::move(next);
        if (move <= tol) return {std::move(v), it};
    }
    return {std::move(v), max_iter};  // caller decides whether this is fatal
}

}  // namespace detail

/// Solves the step VI.
///
/// Strongly monotone case (lambda_min(M) = alpha > 0): the projected
/// fixed-point iteration with rho = alpha/|M|^2 converges to the unique
/// solution. Degenerate case (alpha = 0): the Tikhonov schedule solves the VI
/// for M + eps_j I with eps_j = eps0 * theta^j, warm-starting each stage, and
/// returns the last stage's solution as an approximate minimal-norm selection.
/// Throws NoConverge when the residual target is unreached.
inline VIStepResult solve_vi(const StepVI& p, const VISolveConfig& cfg = {}) {
    cfg.validate();
    Vec start = cfg.warm_start ? *cfg.warm_start : project(p.S, zeros(p.M.dim()), cfg.projection);
    if (start.size() != p.M.dim())
        throw DimensionMismatch("solve_vi: warm start does not match problem dim");

    const double alpha = p.M.coercivity_modulus();
    const double opnorm = p.M.operator_norm();

    VIStepResult result;
    if (alpha > 0.0) {
        const double rho = alpha / (opnorm * opnorm);
        auto [v, iters] =
            detail::projected_fixed_point(p.M, p.q, p.S, rho, std::move(start), cfg.tol,
                                          cfg.max_iter, cfg.projection);
        result.v = std::move(v);
        result.rho = rho;
        result.iterations = iters;
    } else {
        Vec v = std::move(start);
        std::size_t total = 0;
        double rho = 0.0;
        double eps = cfg.eps0;
        for (std::size_t stage = 0; stage < cfg.stages; ++stage, eps *= cfg.theta) {
            const SymmetricOperator reg = p.M.plus_scaled(eps, SymmetricOperator::identity(p.M.dim()));
            const double l = reg.operator_norm();
            rho = std::max(reg.coercivity_modulus(), eps) / (l * l);
            auto [next, iters] = detail::projected_fixed_point(reg, p.q, p.S, rho, std::move(v),
                                                               cfg.tol, cfg.max_iter, cfg.projection);
            v = std::move(next);
            total += iters;
        }
        result.v = std::move(v);
        result.rho = rho;
        result.iterations = total;
    }

    result.residual = vi_residual(p, result.v, result.rho, cfg.projection);
    if (result.residual > cfg.tol) throw NoConverge(cfg.max_iter, result.residual);
    return result;
}

}  // namespace sweepvel

#endif  // SWEEPVEL_VI_HPP
