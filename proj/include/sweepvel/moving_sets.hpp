#ifndef SWEEPVEL_MOVING_SETS_HPP
#define SWEEPVEL_MOVING_SETS_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "sweepvel/convex_sets.hpp"
#include "sweepvel/time_function.hpp"

namespace sweepvel {

/// The set S shifted by v.
inline ConvexSetDesc translate(const ConvexSetDesc& set, const Vec& v) {
    if (const auto* s = set.get_if<WholeSpace>()) return ConvexSetDesc::whole_space(s->dim);
    if (const auto* s = set.get_if<Singleton>()) return ConvexSetDesc::singleton(add(s->point, v));
    if (const auto* s = set.get_if<Ball>())
        return ConvexSetDesc::ball(add(s->center, v), s->radius);
    if (const auto* s = set.get_if<Box>())
        return ConvexSetDesc::box(add(s->lo, v), add(s->hi, v));
    if (const auto* s = set.get_if<Halfspace>())
        return ConvexSetDesc::halfspace(s->normal, s->offset + dot(s->normal, v));
    if (const auto* s = set.get_if<Hyperplane>())
        return ConvexSetDesc::hyperplane(s->normal, s->offset + dot(s->normal, v));
    if (const auto* s = set.get_if<AffineSubspace>())
        return ConvexSetDesc::affine_subspace(add(s->point, v), s->basis);
    const auto& s = *set.get_if<Intersection>();
    std::vector<ConvexSetDesc> members;
    members.reserve(s.members.size());
    for (const auto& mem : s.members) members.push_back(translate(mem, v));
    return ConvexSetDesc::intersection(std::move(members), add(s.witness, v));
}

struct StaticFamily {
    ConvexSetDesc set;
    bool operator==(const StaticFamily&) const = default;
};

/// C(t) = set + path(t)
struct TranslateFamily {
    ConvexSetDesc set;
    TimeFunction path;
    bool operator==(const TranslateFamily&) const = default;
};

/// C(t) = closed ball with moving center and radius.
struct BallPathFamily {
    TimeFunction center;
    ScalarTimeFunction radius;
    bool operator==(const BallPathFamily&) const = default;
};

/// C(t) = box [lo(t), hi(t)] componentwise.
struct BoxPathFamily {
    TimeFunction lo, hi;
    bool operator==(const BoxPathFamily&) const = default;
};

/// Time-parametrized family C(t), t in [0, horizon]. Carries the optional
/// Hausdorff-continuity modulus g (d_H(C(s),C(t)) <= |g(s)-g(t)|) and an
/// optional user-declared Lipschitz-like constant beta; neither is derivable
/// numerically in general, so both are metadata supplied by the modeler.
class MovingSet {
public:
    using Variant = std::variant<StaticFamily, TranslateFamily, BallPathFamily, BoxPathFamily>;

    MovingSet(Variant family, double horizon,
              std::optional<ScalarTimeFunction> continuity_modulus = std::nullopt,
              std::optional<double> lipschitz_beta = std::nullopt)
        : family_(std::move(family)), horizon_(horizon),
          modulus_(std::move(continuity_modulus)), beta_(lipschitz_beta) {
        if (!(horizon_ > 0.0)) throw InvariantViolation("moving set horizon must be positive");
    }

    static MovingSet fixed(ConvexSetDesc set, double horizon,
                           std::optional<ScalarTimeFunction> g = std::nullopt,
                           std::optional<double> beta = std::nullopt) {
        return MovingSet(StaticFamily{std::move(set)}, horizon, std::move(g), beta);
    }

    double horizon() const { return horizon_; }
    const Variant& family() const { return family_; }
    const std::optional<ScalarTimeFunction>& continuity_modulus() const { return modulus_; }
    std::optional<double> lipschitz_beta() const { return beta_; }

    std::size_t dim() const {
        if (const auto* s = std::get_if<StaticFamily>(&family_)) return s->set.dim();
        if (const auto* s = std::get_if<TranslateFamily>(&family_)) return s->set.dim();
        if (const auto* s = std::get_if<BallPathFamily>(&family_)) return s->center.dim();
        return std::get<BoxPathFamily>(family_).lo.dim();
    }

    /// C(t); throws TimeOutOfRange outside [0, horizon].
    ConvexSetDesc at(double t) const {
        check_time(t);
        if (const auto* s = std::get_if<StaticFamily>(&family_)) return s->set;
        if (const auto* s = std::get_if<TranslateFamily>(&family_))
            return translate(s->set, s->path(t));
        if (const auto* s = std::get_if<BallPathFamily>(&family_)) {
            const double r = s->radius(t);
            if (!(r >= 0.0)) throw InvariantViolation("ball path radius became negative");
            return ConvexSetDesc::ball(s->center(t), r);
        }
        const auto& s = std::get<BoxPathFamily>(family_);
        return ConvexSetDesc::box(s.lo(t), s.hi(t));
    }

    /// Exact Hausdorff distance d_H(C(s), C(t)) for the supported families.
    double hausdorff_distance(double s, double t) const {
        check_time(s);
        check_time(t);
        if (std::holds_alternative<StaticFamily>(family_)) return 0.0;
        if (const auto* f = std::get_if<TranslateFamily>(&family_))
            return distance(f->path(s), f->path(t));
        if (const auto* f = std::get_if<BallPathFamily>(&family_))
            return distance(f->center(s), f->center(t)) + std::abs(f->radius(s) - f->radius(t));
        if (const auto* f = std::get_if<BoxPathFamily>(&family_)) {
            // For boxes the one-sided sup distance is attained at a corner, so
            // it is the Euclidean norm of the per-coordinate interval excesses.
            const Vec los = f->lo(s), his = f->hi(s);
            const Vec lot = f->lo(t), hit = f->hi(t);
            double fwd = 0.0, bwd = 0.0;
            for (std::size_t i = 0; i < los.size(); ++i) {
                const double a = std::max({0.0, lot[i] - los[i], his[i] - hit[i]});
                const double b = std::max({0.0, los[i] - lot[i], hit[i] - his[i]});
                fwd += a * a;
                bwd += b * b;
            }
            return std::sqrt(std::max(fwd, bwd));
        }
        throw UnsupportedFamily("hausdorff_distance: family has no exact formula");
    }

    /// Max over a uniform grid of d_H(C(s),C(t)) - |g(s)-g(t)|; nonpositive
    /// (up to 1e-8) when the declared modulus really dominates the family.
    double continuity_audit(std::size_t grid_points = 101) const {
        if (!modulus_) throw MissingConstant("continuity audit needs a declared modulus g");
        if (grid_points < 2) throw InvariantViolation("continuity audit needs >= 2 grid points");
        const auto& g = *modulus_;
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid_points; ++i) {
            const double s = horizon_ * static_cast<double>(i) / static_cast<double>(grid_points - 1);
            for (std::size_t j = i + 1; j < grid_points; ++j) {
                const double t =
                    horizon_ * static_cast<double>(j) / static_cast<double>(grid_points - 1);
                worst = std::max(worst, hausdorff_distance(s, t) - std::abs(g(s) - g(t)));
            }
        }
        return worst;
    }

    bool operator==(const MovingSet& o) const {
        return family_ == o.family_ && horizon_ == o.horizon_ && modulus_ == o.modulus_ &&
               beta_ == o.beta_;
    }

private:
    void check_time(double t) const {
        if (!(t >= 0.0) || !(t <= horizon_))
            throw TimeOutOfRange("moving set evaluated outside [0, " + std::to_string(horizon_) +
                                 "] at t=" + std::to_string(t));
    }

    Variant family_;
    double horizon_;
    std::optional<ScalarTimeFunction> modulus_;
    std::optional<double> beta_;
};

}  // namespace sweepvel

#endif  // SWEEPVEL_MOVING_SETS_HPP
