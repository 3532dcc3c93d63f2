#ifndef SWEEPVEL_TIME_FUNCTION_HPP
#define SWEEPVEL_TIME_FUNCTION_HPP

#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include "sweepvel/core.hpp"

namespace sweepvel {

/// Closed-form (or sampled) map [0,T] -> R^n, kept as a value type so problem
/// files round-trip losslessly. Kinds: zero, polynomial, sinusoid, samples.
class TimeFunction {
public:
    struct Zero {
        std::size_t dim;
        bool operator==(const Zero&) const = default;
    };
    /// c0 + c1*t + c2*t^2 + ...
    struct Polynomial {
        std::vector<Vec> coefficients;  // nonempty, all same dim
        bool operator==(const Polynomial&) const = default;
    };
    /// offset + amplitude * sin(omega*t + phase), componentwise amplitude.
    struct Sinusoid {
        Vec offset;
        Vec amplitude;
        double omega = 1.0;
        double phase = 0.0;
        bool operator==(const Sinusoid&) const = default;
    };
    /// Uniform samples over [0, horizon] (endpoints included), linear interpolation.
    struct Samples {
        std::vector<Vec> values;  // at least 2
        double horizon = 1.0;
        bool operator==(const Samples&) const = default;
    };

    static TimeFunction zero(std::size_t dim) { return TimeFunction(Zero{dim}); }

    static TimeFunction constant(Vec value) {
        return polynomial({std::move(value)});
    }

    static TimeFunction polynomial(std::vector<Vec> coefficients) {
        if (coefficients.empty())
            throw InvariantViolation("polynomial time function needs at least one coefficient");
        const std::size_t n = coefficients.front().size();
        for (const auto& c : coefficients)
            if (c.size() != n) throw DimensionMismatch("polynomial coefficients differ in dimension");
        return TimeFunction(Polynomial{std::move(coefficients)});
    }

    static TimeFunction sinusoid(Vec offset, Vec amplitude, double omega, double phase) {
        require_same_dim(offset, amplitude, "sinusoid");
        return TimeFunction(Sinusoid{std::move(offset), std::move(amplitude), omega, phase});
    }

    static TimeFunction samples(std::vector<Vec> values, double horizon) {
        if (values.size() < 2)
            throw InvariantViolation("sampled time function needs at least two samples");
        if (!(horizon > 0.0)) throw InvariantViolation("sampled time function needs horizon > 0");
        const std::size_t n = values.front().size();
        for (const auto& v : values)
            if (v.size() != n) throw DimensionMismatch("samples differ in dimension");
        return TimeFunction(Samples{std::move(values), horizon});
    }

    std::size_t dim() const {
        if (const auto* z = std::get_if<Zero>(&v_)) return z->dim;
        if (const auto* p = std::get_if<Polynomial>(&v_)) return p->coefficients.front().size();
        if (const auto* s = std::get_if<Sinusoid>(&v_)) return s->offset.size();
        return std::get<Samples>(v_).values.front().size();
    }

    Vec operator()(double t) const {
        if (const auto* z = std::get_if<Zero>(&v_)) return zeros(z->dim);
        if (const auto* p = std::get_if<Polynomial>(&v_)) {
            // Horner evaluation.
            Vec r = p->coefficients.back();
            for (std::size_t j = p->coefficients.size() - 1; j-- > 0;)
                r = axpy(p->coefficients[j], t, r);
            return r;
        }
        if (const auto* s = std::get_if<Sinusoid>(&v_)) {
            const double w = std::sin(s->omega * t + s->phase);
            return axpy(s->offset, w, s->amplitude);
        }
        const auto& sm = std::get<Samples>(v_);
        const std::size_t m = sm.values.size() - 1;
        double u = t / sm.horizon * static_cast<double>(m);
        if (u <= 0.0) return sm.values.front();
        if (u >= static_cast<double>(m)) return sm.values.back();
        const auto i = static_cast<std::size_t>(u);
        const double w = u - static_cast<double>(i);
        return axpy(scaled(1.0 - w, sm.values[i]), w, sm.values[i + 1]);
    }

    bool is_zero_kind() const { return std::holds_alternative<Zero>(v_); }

    using Variant = std::variant<Zero, Polynomial, Sinusoid, Samples>;
    const Variant& desc() const { return v_; }

    bool operator==(const TimeFunction&) const = default;

private:
    explicit TimeFunction(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

/// Scalar-valued counterpart of TimeFunction; used for radii and for the
/// Hausdorff-continuity modulus g.
class ScalarTimeFunction {
public:
    struct Zero {
        bool operator==(const Zero&) const = default;
    };
    struct Polynomial {
        std::vector<double> coefficients;
        bool operator==(const Polynomial&) const = default;
    };
    struct Sinusoid {
        double offset = 0.0, amplitude = 1.0, omega = 1.0, phase = 0.0;
        bool operator==(const Sinusoid&) const = default;
    };
    struct Samples {
        std::vector<double> values;
        double horizon = 1.0;
        bool operator==(const Samples&) const = default;
    };

    static ScalarTimeFunction zero() { return ScalarTimeFunction(Zero{}); }

    static ScalarTimeFunction constant(double value) { return polynomial({value}); }

    static ScalarTimeFunction polynomial(std::vector<double> coefficients) {
        if (coefficients.empty())
            throw InvariantViolation("polynomial scalar function needs at least one coefficient");
        return ScalarTimeFunction(Polynomial{std::move(coefficients)});
    }

    static ScalarTimeFunction sinusoid(double offset, double amplitude, double omega, double phase) {
        return ScalarTimeFunction(Sinusoid{offset, amplitude, omega, phase});
    }

    static ScalarTimeFunction samples(std::vector<double> values, double horizon) {
        if (values.size() < 2)
            throw InvariantViolation("sampled scalar function needs at least two samples");
        if (!(horizon > 0.0)) throw InvariantViolation("sampled scalar function needs horizon > 0");
        return ScalarTimeFunction(Samples{std::move(values), horizon});
    }

    double operator()(double t) const {
        if (std::holds_alternative<Zero>(v_)) return 0.0;
        if (const auto* p = std::get_if<Polynomial>(&v_)) {
            double r = p->coefficients.back();
            for (std::size_t j = p->coefficients.size() - 1; j-- > 0;)
                r = p->coefficients[j] + t * r;
            return r;
        }
        if (const auto* s = std::get_if<Sinusoid>(&v_))
            return s->offset + s->amplitude * std::sin(s->omega * t + s->phase);
        const auto& sm = std::get<Samples>(v_);
        const std::size_t m = sm.values.size() - 1;
        double u = t / sm.horizon * static_cast<double>(m);
        if (u <= 0.0) return sm.values.front();
        if (u >= static_cast<double>(m)) return sm.values.back();
        const auto i = static_cast<std::size_t>(u);
        const double w = u - static_cast<double>(i);
        return (1.0 - w) * sm.values[i] + w * sm.values[i + 1];
    }

    using Variant = std::variant<Zero, Polynomial, Sinusoid, Samples>;
    const Variant& desc() const { return v_; }

    bool operator==(const ScalarTimeFunction&) const = default;

private:
    explicit ScalarTimeFunction(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

}  // namespace sweepvel

#endif  // SWEEPVEL_TIME_FUNCTION_HPP
