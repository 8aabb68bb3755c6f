#ifndef HYPERODE_JET_HPP
#define HYPERODE_JET_HPP

#include <cmath>
#include <cstdint>

#include "hyperode/errors.hpp"

namespace hyperode {

// Second-order forward-mode jet: value, first and second derivative with
// respect to one independent variable. Arithmetic follows the truncated
// Taylor rules, so derivatives are exact (no finite differencing).
struct Jet2 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;

    static Jet2 constant(double c) { return {c, 0.0, 0.0}; }
    static Jet2 variable(double x) { return {x, 1.0, 0.0}; }

    bool finite() const { return std::isfinite(v) && std::isfinite(d1) && std::isfinite(d2); }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.d1, -a.d2}; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
    if (b.v == 0.0) throw EvalError("division by zero");
    const double v = a.v / b.v;
    const double d1 = (a.d1 - v * b.d1) / b.v;
    const double d2 = (a.d2 - 2.0 * d1 * b.d1 - v * b.d2) / b.v;
    return {v, d1, d2};
}

inline Jet2 operator+(const Jet2& a, double c) { return {a.v + c, a.d1, a.d2}; }
inline Jet2 operator+(double c, const Jet2& a) { return a + c; }
inline Jet2 operator-(const Jet2& a, double c) { return {a.v - c, a.d1, a.d2}; }
inline Jet2 operator-(double c, const Jet2& a) { return {c - a.v, -a.d1, -a.d2}; }
inline Jet2 operator*(const Jet2& a, double c) { return {a.v * c, a.d1 * c, a.d2 * c}; }
inline Jet2 operator*(double c, const Jet2& a) { return a * c; }
inline Jet2 operator/(const Jet2& a, double c) { return {a.v / c, a.d1 / c, a.d2 / c}; }
inline Jet2 operator/(double c, const Jet2& a) { return Jet2::constant(c) / a; }

// Composition with a scalar function f given f(u), f'(u), f''(u).
inline Jet2 compose(const Jet2& u, double f, double df, double ddf) {
    return {f, df * u.d1, ddf * u.d1 * u.d1 + df * u.d2};
}

inline Jet2 sin(const Jet2& u) {
    const double s = std::sin(u.v), c = std::cos(u.v);
    return compose(u, s, c, -s);
}

inline Jet2 cos(const Jet2& u) {
    const double s = std::sin(u.v), c = std::cos(u.v);
    return compose(u, c, -s, -c);
}

inline Jet2 tan(const Jet2& u) {
    const double t = std::tan(u.v);
    const double sec2 = 1.0 + t * t;
    return compose(u, t, sec2, 2.0 * t * sec2);
}

inline Jet2 exp(const Jet2& u) {
    const double e = std::exp(u.v);
    return compose(u, e, e, e);
}

inline Jet2 log(const Jet2& u) {
    if (u.v <= 0.0) throw EvalError("ln of a non-positive value");
    const double inv = 1.0 / u.v;
    return compose(u, std::log(u.v), inv, -inv * inv);
}

inline Jet2 sqrt(const Jet2& u) {
    if (u.v < 0.0) throw EvalError("sqrt of a negative value");
    if (u.v == 0.0) {
        if (u.d1 == 0.0 && u.d2 == 0.0) return Jet2::constant(0.0);
        throw EvalError("sqrt not differentiable at zero");
    }
    const double s = std::sqrt(u.v);
    const double s1 = u.d1 / (2.0 * s);
    const double s2 = (u.d2 - 2.0 * s1 * s1) / (2.0 * s);
    return {s, s1, s2};
}

inline Jet2 abs(const Jet2& u) {
    if (u.v == 0.0) {
        if (u.d1 == 0.0 && u.d2 == 0.0) return Jet2::constant(0.0);
        throw EvalError("abs not differentiable at zero");
    }
    const double sgn = u.v > 0.0 ? 1.0 : -1.0;
    return {sgn * u.v, sgn * u.d1, sgn * u.d2};
}

inline Jet2 sinh(const Jet2& u) {
    const double s = std::sinh(u.v), c = std::cosh(u.v);
    return compose(u, s, c, s);
}

inline Jet2 cosh(const Jet2& u) {
    const double s = std::sinh(u.v), c = std::cosh(u.v);
    return compose(u, c, s, c);
}

inline Jet2 tanh(const Jet2& u) {
    const double t = std::tanh(u.v);
    const double sech2 = 1.0 - t * t;
    return compose(u, t, sech2, -2.0 * t * sech2);
}

// Integer power by repeated squaring; keeps the sign structure of negative
// bases intact, which exp(n ln u) would not.
inline Jet2 powi(const Jet2& u, std::int64_t n) {
    if (n == 0) return Jet2::constant(1.0);
    if (n < 0) return Jet2::constant(1.0) / powi(u, -n);
    Jet2 result = Jet2::constant(1.0);
    Jet2 base = u;
    std::int64_t e = n;
    while (e > 0) {
        if (e & 1) result = result * base;
        base = base * base;
        e >>= 1;
    }
    return result;
}

// General power. Integer exponents (constant jets with integral value) go
// through powi; anything else requires a positive base.
inline Jet2 pow(const Jet2& u, const Jet2& e) {
    const bool const_exp = (e.d1 == 0.0 && e.d2 == 0.0);
    if (const_exp && e.v == std::floor(e.v) && std::fabs(e.v) <= 1e9)
        return powi(u, static_cast<std::int64_t>(e.v));
    if (u.v <= 0.0) throw EvalError("power with non-integer exponent requires a positive base");
    return exp(e * log(u));
}

} // namespace hyperode

#endif
