#ifndef SWEEPVEL_OPERATORS_HPP
#define SWEEPVEL_OPERATORS_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "sweepvel/core.hpp"

namespace sweepvel {

/// Full eigendecomposition of a symmetric PSD operator.
///
/// Eigenvalues are nondecreasing; eigenvectors form the matching orthonormal
/// basis. Eigenvalues with |lambda| <= tol * operator_norm are snapped to zero
/// and their eigenvectors span kernel_basis. coercivity_modulus is the largest
/// c with <Ax,x> >= c|x|^2, i.e. max(0, smallest eigenvalue).
struct OperatorSpectrum {
    std::vector<double> eigenvalues;
    std::vector<Vec> eigenvectors;
    double operator_norm = 0.0;
    double coercivity_modulus = 0.0;
    std::vector<Vec> kernel_basis;
};

namespace detail {

/// Cyclic Jacobi rotations on a dense symmetric matrix. Deterministic and
/// dependency-free; plenty for the small dimensions this library targets.
/// Returns (eigenvalues, eigenvectors as rows of V) unsorted.
inline void jacobi_eigen(std::size_t n, std::vector<double>& a, std::vector<double>& v,
                         std::size_t max_sweeps = 128) {
    auto at = [n](std::vector<double>& m, std::size_t i, std::size_t j) -> double& {
        return m[i * n + j];
    };
    // v starts as the identity; accumulates rotations columnwise.
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) at(v, i, i) = 1.0;
    if (n < 2) return;

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(at(a, i, i)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) scale = std::max(scale, std::abs(at(a, i, j)));
    if (scale == 0.0) return;

    const double stop = 1e-15 * scale;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off = std::max(off, std::abs(at(a, i, j)));
        if (off <= stop) return;

        for (std::size_t p = 0; p < n - 1; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(a, p, q);
                if (std::abs(apq) <= stop * 1e-2) continue;
                const double app = at(a, p, p);
                const double aqq = at(a, q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = at(a, k, p);
                    const double akq = at(a, k, q);
                    at(a, k, p) = c * akp - s * akq;
                    at(a, k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = at(a, p, k);
                    const double aqk = at(a, q, k);
                    at(a, p, k) = c * apk - s * aqk;
                    at(a, q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = at(v, k, p);
                    const double vkq = at(v, k, q);
                    at(v, k, p) = c * vkp - s * vkq;
                    at(v, k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    throw EigenNoConverge(max_sweeps);
}

}  // namespace detail

/// Dense symmetric positive-semidefinite operator on R^n. Stands in for the
/// A0 and A1 operators of the sweeping process. Immutable after construction;
/// the spectrum is computed once and cached.
class SymmetricOperator {
public:
    /// Default relative threshold below which eigenvalues count as kernel.
    static constexpr double kernel_tol = 1e-10;

    SymmetricOperator(std::size_t dim, std::vector<double> entries)
        : dim_(dim), entries_(std::move(entries)) {
        if (dim_ == 0) throw InvariantViolation("operator dimension must be positive");
        if (entries_.size() != dim_ * dim_)
            throw DimensionMismatch("operator entries must be a dim x dim row-major matrix");
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = i + 1; j < dim_; ++j) {
                const double d = std::abs(entry(i, j) - entry(j, i));
                if (d > 1e-12 * (1.0 + std::abs(entry(i, j))))
                    throw InvariantViolation("operator is not symmetric at (" + std::to_string(i) +
                                             "," + std::to_string(j) + ")");
            }
        double raw_min = 0.0;
        spectrum_ = std::make_shared<OperatorSpectrum>(compute_spectrum(kernel_tol, &raw_min));
        const double floor = -1e-10 * spectrum_->operator_norm;
        if (raw_min < floor)
            throw InvariantViolation("operator is not positive semidefinite (min eigenvalue " +
                                     std::to_string(raw_min) + ")");
    }

    static SymmetricOperator identity(std::size_t dim) {
        std::vector<double> e(dim * dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) e[i * dim + i] = 1.0;
        return {dim, std::move(e)};
    }

    static SymmetricOperator zero(std::size_t dim) {
        return {dim, std::vector<double>(dim * dim, 0.0)};
    }

    static SymmetricOperator diagonal(const Vec& d) {
        std::vector<double> e(d.size() * d.size(), 0.0);
        for (std::size_t i = 0; i < d.size(); ++i) e[i * d.size() + i] = d[i];
        return {d.size(), std::move(e)};
    }

    std::size_t dim() const { return dim_; }
    double entry(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
    const std::vector<double>& entries() const { return entries_; }

    /// Exact matrix-vector product.
    Vec apply(const Vec& x) const {
        if (x.size() != dim_) throw DimensionMismatch("apply: vector does not match operator dim");
        Vec r(dim_, 0.0);
        for (std::size_t i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) s += entries_[i * dim_ + j] * x[j];
            r[i] = s;
        }
        return r;
    }

    /// Cached spectrum at the default kernel threshold.
    const OperatorSpectrum& spectrum() const { return *spectrum_; }

    /// Spectrum with a custom kernel-snapping threshold (relative to the norm).
    OperatorSpectrum spectrum(double tol) const { return compute_spectrum(tol); }

    double operator_norm() const { return spectrum_->operator_norm; }
    double coercivity_modulus() const { return spectrum_->coercivity_modulus; }
    bool is_zero() const { return spectrum_->operator_norm == 0.0; }

    /// Entrywise A + c*B, revalidated as a PSD operator.
    SymmetricOperator plus_scaled(double c, const SymmetricOperator& other) const {
        if (other.dim_ != dim_) throw DimensionMismatch("plus_scaled: operator dims differ");
        std::vector<double> e(entries_);
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += c * other.entries_[i];
        return {dim_, std::move(e)};
    }

    bool operator==(const SymmetricOperator& o) const {
        return dim_ == o.dim_ && entries_ == o.entries_;
    }

private:
    OperatorSpectrum compute_spectrum(double tol, double* raw_min = nullptr) const {
        std::vector<double> a(entries_);
        std::vector<double> v(dim_ * dim_);
        detail::jacobi_eigen(dim_, a, v);

        std::vector<std::size_t> order(dim_);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t i, std::size_t j) { return a[i * dim_ + i] < a[j * dim_ + j]; });

        OperatorSpectrum s;
        s.eigenvalues.reserve(dim_);
        s.eigenvectors.reserve(dim_);
        double norm2 = 0.0;
        for (std::size_t idx : order) norm2 = std::max(norm2, std::abs(a[idx * dim_ + idx]));
        s.operator_norm = norm2;
        if (raw_min) *raw_min = a[order.front() * dim_ + order.front()];

        const double snap = tol * norm2;
        for (std::size_t idx : order) {
            double lambda = a[idx * dim_ + idx];
            Vec col(dim_);
            for (std::size_t k = 0; k < dim_; ++k) col[k] = v[k * dim_ + idx];
            if (std::abs(lambda) <= snap) {
                lambda = 0.0;
                s.kernel_basis.push_back(col);
            }
            s.eigenvalues.push_back(lambda);
            s.eigenvectors.push_back(std::move(col));
        }
        s.coercivity_modulus = std::max(0.0, s.eigenvalues.front());
        return s;
    }

    std::size_t dim_;
    std::vector<double> entries_;
    std::shared_ptr<const OperatorSpectrum> spectrum_;
};

inline Vec apply(const SymmetricOperator& a, const Vec& x) { return a.apply(x); }

/// Orthogonal projection onto ker A, through the spectral kernel basis.
inline Vec kernel_project(const OperatorSpectrum& s, const Vec& x) {
    Vec r(x.size(), 0.0);
    for (const auto& b : s.kernel_basis) {
        const double c = dot(x, b);
        for (std::size_t i = 0; i < x.size(); ++i) r[i] += c * b[i];
    }
    return r;
}

}  // namespace sweepvel

#endif  // SWEEPVEL_OPERATORS_HPP
