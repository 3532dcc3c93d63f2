#ifndef SWEEPVEL_CONVEX_SETS_HPP
#define SWEEPVEL_CONVEX_SETS_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include "sweepvel/core.hpp"

namespace sweepvel {

class ConvexSetDesc;

struct ProjectionConfig {
    double tol = 1e-10;          // Dykstra stopping tolerance
    std::size_t max_iter = 100000;  // Dykstra sweep cap
};

struct WholeSpace {
    std::size_t dim;
    bool operator==(const WholeSpace&) const = default;
};

struct Singleton {
    Vec point;
    bool operator==(const Singleton&) const = default;
};

struct Ball {
    Vec center;
    double radius;
    bool operator==(const Ball&) const = default;
};

struct Box {
    Vec lo, hi;
    bool operator==(const Box&) const = default;
};

/// {x : <normal, x> <= offset}
struct Halfspace {
    Vec normal;
    double offset;
    bool operator==(const Halfspace&) const = default;
};

/// {x : <normal, x> = offset}
struct Hyperplane {
    Vec normal;
    double offset;
    bool operator==(const Hyperplane&) const = default;
};

/// point + span(basis), basis orthonormal. An empty basis makes a singleton.
struct AffineSubspace {
    Vec point;
    std::vector<Vec> basis;
    bool operator==(const AffineSubspace&) const = default;
};

/// Intersection of sets that each have an exact projection. The witness is a
/// common point supplied at construction; it certifies nonemptiness.
struct Intersection {
    std::vector<ConvexSetDesc> members;
    Vec witness;
    bool operator==(const Intersection&) const;
};

/// A nonempty closed convex subset of R^n that we can project onto. Closed
/// forms exist for every variant except intersection, which runs Dykstra's
/// alternating projections over its members.
class ConvexSetDesc {
public:
    using Variant = std::variant<WholeSpace, Singleton, Ball, Box, Halfspace, Hyperplane,
                                 AffineSubspace, Intersection>;

    static ConvexSetDesc whole_space(std::size_t dim) {
        if (dim == 0) throw InvariantViolation("set dimension must be positive");
        return ConvexSetDesc(WholeSpace{dim});
    }

    static ConvexSetDesc singleton(Vec point) {
        if (point.empty()) throw InvariantViolation("set dimension must be positive");
        return ConvexSetDesc(Singleton{std::move(point)});
    }

    static ConvexSetDesc ball(Vec center, double radius) {
        if (center.empty()) throw InvariantViolation("set dimension must be positive");
        if (!(radius >= 0.0)) throw InvariantViolation("ball radius must be >= 0");
        return ConvexSetDesc(Ball{std::move(center), radius});
    }

    static ConvexSetDesc box(Vec lo, Vec hi) {
        require_same_dim(lo, hi, "box");
        if (lo.empty()) throw InvariantViolation("set dimension must be positive");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i]))
                throw InvariantViolation("box requires lo <= hi componentwise");
        return ConvexSetDesc(Box{std::move(lo), std::move(hi)});
    }

    static ConvexSetDesc halfspace(Vec normal, double offset) {
        if (norm(normal) == 0.0) throw InvariantViolation("halfspace normal must be nonzero");
        return ConvexSetDesc(Halfspace{std::move(normal), offset});
    }

    static ConvexSetDesc hyperplane(Vec normal, double offset) {
        if (norm(normal) == 0.0) throw InvariantViolation("hyperplane normal must be nonzero");
        return ConvexSetDesc(Hyperplane{std::move(normal), offset});
    }

    static ConvexSetDesc affine_subspace(Vec point, std::vector<Vec> basis) {
        for (std::size_t i = 0; i < basis.size(); ++i) {
            require_same_dim(point, basis[i], "affine_subspace");
            for (std::size_t j = 0; j <= i; ++j) {
                const double expect = (i == j) ? 1.0 : 0.0;
                if (std::abs(dot(basis[i], basis[j]) - expect) > 1e-12)
                    throw InvariantViolation("affine subspace basis is not orthonormal");
            }
        }
        return ConvexSetDesc(AffineSubspace{std::move(point), std::move(basis)});
    }

    static ConvexSetDesc intersection(std::vector<ConvexSetDesc> members, Vec witness);

    std::size_t dim() const;
    const Variant& desc() const { return v_; }

    template <typename T>
    const T* get_if() const {
        return std::get_if<T>(&v_);
    }

    bool operator==(const ConvexSetDesc& o) const { return v_ == o.v_; }

private:
    explicit ConvexSetDesc(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

inline bool Intersection::operator==(const Intersection& o) const {
    return members == o.members && witness == o.witness;
}

inline std::size_t ConvexSetDesc::dim() const {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, WholeSpace>) return s.dim;
            else if constexpr (std::is_same_v<T, Singleton>) return s.point.size();
            else if constexpr (std::is_same_v<T, Ball>) return s.center.size();
            else if constexpr (std::is_same_v<T, Box>) return s.lo.size();
            else if constexpr (std::is_same_v<T, Halfspace>) return s.normal.size();
            else if constexpr (std::is_same_v<T, Hyperplane>) return s.normal.size();
            else if constexpr (std::is_same_v<T, AffineSubspace>) return s.point.size();
            else return s.witness.size();
        },
        v_);
}

Vec project(const ConvexSetDesc& set, const Vec& x, const ProjectionConfig& cfg = {});

namespace detail {

inline Vec project_closed_form(const ConvexSetDesc::Variant& v, const Vec& x) {
    if (const auto* s = std::get_if<WholeSpace>(&v)) {
        (void)s;
        return x;
    }
    if (const auto* s = std::get_if<Singleton>(&v)) return s->point;
    if (const auto* s = std::get_if<Ball>(&v)) {
        const Vec d = sub(x, s->center);
        const double r = norm(d);
        if (r <= s->radius) return x;
        return axpy(s->center, s->radius / r, d);
    }
    if (const auto* s = std::get_if<Box>(&v)) {
        Vec r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = std::clamp(x[i], s->lo[i], s->hi[i]);
        return r;
    }
    if (const auto* s = std::get_if<Halfspace>(&v)) {
        const double g = dot(s->normal, x) - s->offset;
        if (g <= 0.0) return x;
        return axpy(x, -g / dot(s->normal, s->normal), s->normal);
    }
    if (const auto* s = std::get_if<Hyperplane>(&v)) {
        const double g = dot(s->normal, x) - s->offset;
        return axpy(x, -g / dot(s->normal, s->normal), s->normal);
    }
    const auto& s = std::get<AffineSubspace>(v);
    Vec r = s.point;
    const Vec d = sub(x, s.point);
    for (const auto& b : s.basis) {
        const double c = dot(d, b);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += c * b[i];
    }
    return r;
}

/// Boyle-Dykstra cycles over the members. Unlike plain alternating
/// projections this converges to the exact projection onto the intersection.
/// Stops on the robust criterion of Birgin and Raydan (SISC 26(4), 2005):
/// the l2 change of the correction increments over one cycle. The plain
/// successive-iterate distance can vanish at non-solutions (the iterate may
/// repeat exactly for a full cycle while the increments still drift).
inline Vec project_dykstra(const Intersection& s, const Vec& x, const ProjectionConfig& cfg) {
    const std::size_t m = s.members.size();
    std::vector<Vec> increments(m, zeros(x.size()));
    Vec cur = x;
    for (std::size_t sweep = 0; sweep < cfg.max_iter; ++sweep) {
        double change2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const Vec shifted = add(cur, increments[i]);
            const Vec next = project_closed_form(s.members[i].desc(), shifted);
            const Vec updated = sub(shifted, next);
            const double d = distance(updated, increments[i]);
            change2 += d * d;
            increments[i] = updated;
            cur = next;
        }
        if (std::sqrt(change2) <= cfg.tol) return cur;
    }
    throw DykstraNoConverge(cfg.max_iter);
}

}  // namespace detail

inline ConvexSetDesc ConvexSetDesc::intersection(std::vector<ConvexSetDesc> members, Vec witness) {
    if (members.empty()) throw InvariantViolation("intersection needs at least one member");
    for (const auto& mem : members) {
        if (mem.dim() != witness.size())
            throw DimensionMismatch("intersection member dim does not match witness");
        if (std::holds_alternative<Intersection>(mem.desc()))
            throw InvariantViolation("intersection members must have exact projections");
        // The witness certifies the common point required for nonemptiness.
        const Vec p = detail::project_closed_form(mem.desc(), witness);
        if (distance(p, witness) > 1e-9)
            throw InvariantViolation("intersection witness is not a common point of the members");
    }
    return ConvexSetDesc(Intersection{std::move(members), std::move(witness)});
}

inline Vec project(const ConvexSetDesc& set, const Vec& x, const ProjectionConfig& cfg) {
    if (x.size() != set.dim()) throw DimensionMismatch("project: vector does not match set dim");
    if (const auto* s = set.get_if<Intersection>()) return detail::project_dykstra(*s, x, cfg);
    return detail::project_closed_form(set.desc(), x);
}

inline bool contains(const ConvexSetDesc& set, const Vec& x, double tol,
                     const ProjectionConfig& cfg = {}) {
    return distance(project(set, x, cfg), x) <= tol;
}

/// Membership test w in N_S(x) through the projection identity
/// w in N_S(x) iff x = P_S(x + w), plus x in S itself.
inline bool normal_cone_contains(const ConvexSetDesc& set, const Vec& x, const Vec& w, double tol,
                                 const ProjectionConfig& cfg = {}) {
    if (!contains(set, x, tol, cfg)) return false;
    return distance(project(set, add(x, w), cfg), x) <= tol;
}

/// Smallest known radius rho with S contained in the closed ball rho*B(0,1).
/// Returns a negative value when the variant has no computable bound.
inline double enclosing_radius(const ConvexSetDesc& set) {
    if (const auto* s = set.get_if<Singleton>()) return norm(s->point);
    if (const auto* s = set.get_if<Ball>()) return norm(s->center) + s->radius;
    if (const auto* s = set.get_if<Box>()) {
        double sum = 0.0;
        for (std::size_t i = 0; i < s->lo.size(); ++i) {
            const double m = std::max(std::abs(s->lo[i]), std::abs(s->hi[i]));
            sum += m * m;
        }
        return std::sqrt(sum);
    }
    if (const auto* s = set.get_if<Intersection>()) {
        double best = -1.0;
        for (const auto& mem : s->members) {
            const double r = enclosing_radius(mem);
            if (r >= 0.0 && (best < 0.0 || r < best)) best = r;
        }
        return best;
    }
    return -1.0;
}

}  // namespace sweepvel

#endif  // SWEEPVEL_CONVEX_SETS_HPP
