#ifndef HYPERODE_TESTS_SUPPORT_HPP
#define HYPERODE_TESTS_SUPPORT_HPP

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hyperode/random.hpp"
#include "hyperode/solutions.hpp"

namespace hyperode::testing {

// Five-point central differences used as oracles throughout the tests.
inline double fd1(const std::function<double(double)>& f, double x, double h) {
    return (f(x - 2 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2 * h)) / (12.0 * h);
}

inline double fd2(const std::function<double(double)>& f, double x, double h) {
    return (-f(x - 2 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2 * h)) /
           (12.0 * h * h);
}

// Random gentle C^1 coefficient functions. Scales are kept moderate so the
// finite-difference oracles stay in their sweet spot.
inline HFunction random_smooth_h(Rng& rng) {
    const double a = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(0.3, 1.4);
    const double c = rng.uniform(0.4, 1.2);
    const double d = rng.uniform(0.0, 6.0);
    const double e = rng.uniform(-0.25, 0.25);
    switch (rng.below(5)) {
        case 0: return HFunction::from_text("a + b*sin(c*x + d)",
                                            {{"a", a}, {"b", b}, {"c", c}, {"d", d}});
        case 1: return HFunction::from_text("a + e*x", {{"a", a}, {"e", e}});
        case 2: return HFunction::from_text("a + e*x^2 + b*cos(c*x)",
                                            {{"a", a}, {"e", e}, {"b", b}, {"c", c}});
        case 3: return HFunction::from_text("a + b*tanh(x) - b/(1 + x^2)", {{"a", a}, {"b", b}});
        default: return HFunction::from_text("a + b*sin(c*x) + e*x",
                                             {{"a", a}, {"b", b}, {"c", c}, {"e", e}});
    }
}

// Strictly negative variants: M_h has no degeneracy locus, so geodesics are
// long-lived.
inline HFunction random_negative_h(Rng& rng) {
    const double a = rng.uniform(0.5, 2.5);
    const double b = rng.uniform(0.0, a - 0.3);
    const double c = rng.uniform(0.4, 1.2);
    const double d = rng.uniform(0.0, 6.0);
    return HFunction::from_text("-(a + b*sin(c*x + d))",
                                {{"a", a}, {"b", b}, {"c", c}, {"d", d}});
}

inline MhPoint random_nondegenerate_point(const HFunction& h, Rng& rng, double xlo = -2.0,
                                          double xhi = 2.0, double plo = 0.3, double phi = 3.0) {
    for (int i = 0; i < 20000; ++i) {
        const double x = rng.uniform(xlo, xhi);
        const double p = rng.uniform(plo, phi);
        const double hv = h.eval_jet(x).v;
        if (std::fabs(p * p - hv) > 0.05 * (1.0 + p * p + std::fabs(hv))) return {x, p};
    }
    throw std::runtime_error("no non-degenerate point found");
}

// Initial data for integrate_explicit with the starting point well off the
// degeneracy locus.
struct ExplicitInit {
    double x0, phi0, dphi0;
};
inline ExplicitInit random_explicit_init(const HFunction& h, Rng& rng) {
    const MhPoint p = random_nondegenerate_point(h, rng, -1.0, 1.0, 0.5, 2.5);
    return {p.x, p.phi, rng.uniform(-0.8, 0.8)};
}

// Truncated power series for u'' + x u = 0 around 0: a_{n+2} = -a_{n-1} /
// ((n+2)(n+1)). Converges fast for |x| <= 1.5; the second oracle for the
// Airy-type cross-check.
inline std::array<double, 2> airy_type_series(double u0, double du0, double x, int terms = 48) {
    std::vector<double> c(static_cast<std::size_t>(terms), 0.0);
    c[0] = u0;
    c[1] = du0;
    for (int n = 1; n + 2 < terms; ++n)
        c[static_cast<std::size_t>(n + 2)] =
            -c[static_cast<std::size_t>(n - 1)] / ((n + 2.0) * (n + 1.0));
    double u = 0.0, du = 0.0;
    for (int n = terms - 1; n >= 0; --n) {
        u = u * x + c[static_cast<std::size_t>(n)];
        if (n >= 1) du = du * x + static_cast<double>(n) * c[static_cast<std::size_t>(n)];
    }
    return {u, du};
}

inline DenseSolution analytic_solution(double lo, double hi,
                                       std::function<std::array<double, 2>(double)> f) {
    return DenseSolution::from_callable(lo, hi, std::move(f));
}

} // namespace hyperode::testing

#endif
