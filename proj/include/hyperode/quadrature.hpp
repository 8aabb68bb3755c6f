#ifndef HYPERODE_QUADRATURE_HPP
#define HYPERODE_QUADRATURE_HPP

#include <cmath>
#include <cstddef>

#include "hyperode/errors.hpp"

namespace hyperode {

namespace gk15 {

// Gauss 7 / Kronrod 15 abscissae and weights on [-1, 1] (QUADPACK values).
inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Single 15-point panel over [a, b]; err receives |K15 - G7|.
template <typename F>
double panel(F&& f, double a, double b, double& err) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(c);
    double result_gauss = wg[3] * fc;
    double result_kronrod = wgk[7] * fc;
    for (int j = 0; j < 7; ++j) {
        const double abscissa = half * xgk[j];
        const double fsum = f(c - abscissa) + f(c + abscissa);
        result_kronrod += wgk[j] * fsum;
        if (j % 2 == 1) result_gauss += wg[j / 2] * fsum;
    }
    err = std::fabs((result_kronrod - result_gauss) * half);
    return result_kronrod * half;
}

} // namespace gk15

// Adaptive Gauss-Kronrod integration by interval bisection. The target is
// absolute; panels are split until the local estimate drops below the target
// prorated by panel width.
template <typename F>
double integrate(F&& f, double a, double b, double abs_target = 1e-11, int max_depth = 28) {
    if (a == b) return 0.0;
    struct Rec {
        const F& fn;
        double target_per_width;
        int max_depth;
        double run(double lo, double hi, int depth) const {
            double err = 0.0;
            const double whole = gk15::panel(fn, lo, hi, err);
            // A deep panel's prorated allowance can sink below the roundoff
            // of the panel value itself; floor it there.
            const double allowance =
                std::max(target_per_width * std::fabs(hi - lo), 1e-14 * std::fabs(whole));
            if (err <= allowance || depth >= max_depth) {
                if (!std::isfinite(whole)) throw NumericError("quadrature produced a non-finite value");
                if (depth >= max_depth && err > 1e3 * allowance)
                    throw NumericError("quadrature failed to converge");
                return whole;
            }
            const double mid = 0.5 * (lo + hi);
            return run(lo, mid, depth + 1) + run(mid, hi, depth + 1);
        }
    };
    const double width = std::fabs(b - a);
    Rec rec{f, abs_target / (width > 0.0 ? width : 1.0), max_depth};
    return rec.run(a, b, 0);
}

} // namespace hyperode

#endif
