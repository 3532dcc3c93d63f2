#ifndef SWEEPVEL_CORE_HPP
#define SWEEPVEL_CORE_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sweepvel {

using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvariantViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Eigen-iteration failed to reduce off-diagonal mass within the sweep cap.
struct EigenNoConverge : std::runtime_error {
    explicit EigenNoConverge(std::size_t sweeps)
        : std::runtime_error("jacobi eigendecomposition: sweep cap exceeded (" +
                             std::to_string(sweeps) + " sweeps)"),
          sweeps(sweeps) {}
    std::size_t sweeps;
};

/// Dykstra's alternating projections did not reach the tolerance in budget.
struct DykstraNoConverge : std::runtime_error {
    explicit DykstraNoConverge(std::size_t max_iter)
        : std::runtime_error("dykstra projection: tolerance unreachable within " +
                             std::to_string(max_iter) + " sweeps"),
          max_iter(max_iter) {}
    std::size_t max_iter;
};

/// VI fixed-point iteration exhausted its iteration budget.
struct NoConverge : std::runtime_error {
    explicit NoConverge(std::size_t max_iter, double residual)
        : std::runtime_error("vi solve: residual target unreached after " +
                             std::to_string(max_iter) + " iterations (residual " +
                             std::to_string(residual) + ")"),
          max_iter(max_iter), residual(residual) {}
    NoConverge(std::size_t max_iter, double residual, std::size_t step)
        : std::runtime_error("vi solve: residual target unreached after " +
                             std::to_string(max_iter) + " iterations at step " +
                             std::to_string(step)),
          max_iter(max_iter), residual(residual), step(step) {}
    std::size_t max_iter;
    double residual;
    std::size_t step = 0;  // offending time step, when raised by the integrator
};

struct TimeOutOfRange : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct GridMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedFamily : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct MissingConstant : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct KernelViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Small dense vector helpers
// ---------------------------------------------------------------------------

inline void require_same_dim(const Vec& a, const Vec& b, const char* what) {
    if (a.size() != b.size())
        throw DimensionMismatch(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

inline double dot(const Vec& a, const Vec& b) {
    require_same_dim(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double distance(const Vec& a, const Vec& b) {
    require_same_dim(a, b, "distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vec add(const Vec& a, const Vec& b) {
    require_same_dim(a, b, "add");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    require_same_dim(a, b, "sub");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec scaled(double c, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

/// r = a + c*b
inline Vec axpy(const Vec& a, double c, const Vec& b) {
    require_same_dim(a, b, "axpy");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + c * b[i];
    return r;
}

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline bool approx_equal(const Vec& a, const Vec& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

}  // namespace sweepvel

#endif  // SWEEPVEL_CORE_HPP
