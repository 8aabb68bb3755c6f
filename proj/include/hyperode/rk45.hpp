#ifndef HYPERODE_RK45_HPP
#define HYPERODE_RK45_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "hyperode/errors.hpp"

namespace hyperode {

// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with the classic
// 4th-order dense output and a PI step-size controller.

template <std::size_t N>
using StateN = std::array<double, N>;

namespace dopri5 {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;

inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

} // namespace dopri5

// One accepted step with its dense-output polynomial; valid on [t0, t1]
// (t1 < t0 for backward integration).
template <std::size_t N>
struct DenseStep {
    double t0 = 0.0;
    double t1 = 0.0;
    std::array<std::array<double, 5>, N> rcont{};

    StateN<N> eval(double t) const {
        const double h = t1 - t0;
        const double theta = (t - t0) / h;
        const double theta1 = 1.0 - theta;
        StateN<N> y;
        for (std::size_t i = 0; i < N; ++i) {
            const auto& r = rcont[i];
            y[i] = r[0] + theta * (r[1] + theta1 * (r[2] + theta * (r[3] + theta1 * r[4])));
        }
        return y;
    }
};

enum class StepControl { Continue, Stop };
enum class IntegrateStatus { ReachedEnd, StoppedByObserver, StepUnderflow };

struct IntegrateOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_max = 0.0;   // 0 = span
    double h_init = 0.0;  // 0 = automatic
    long max_steps = 2000000;
};

template <std::size_t N>
struct IntegrateResult {
    double t = 0.0;
    StateN<N> y{};
    IntegrateStatus status = IntegrateStatus::ReachedEnd;
    long accepted = 0;
    long rejected = 0;
};

// Integrates y' = rhs(t, y) from t0 to t_end (either direction). The observer
// is called after every accepted step with the dense step and the endpoint
// state; returning Stop ends the run (the observer truncates via the dense
// step itself). A RHS throw or non-finite stage rejects the step, so domain
// boundaries act like stiff walls and surface as step underflow.
template <std::size_t N, typename Rhs, typename Observer>
IntegrateResult<N> integrate_rk45(Rhs&& rhs, double t0, const StateN<N>& y0, double t_end,
                                  const IntegrateOptions& opt, Observer&& observer) {
    using namespace dopri5;
    static constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    static constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;

    IntegrateResult<N> res;
    res.t = t0;
    res.y = y0;
    if (t_end == t0) return res;
    const double dir = t_end > t0 ? 1.0 : -1.0;
    const double span = std::fabs(t_end - t0);
    const double h_max = opt.h_max > 0.0 ? opt.h_max : span;

    StateN<N> y = y0;
    StateN<N> k1;
    try {
        k1 = rhs(t0, y);
    } catch (const std::runtime_error&) {
        throw NumericError("right-hand side not evaluable at the initial point");
    }
    for (double v : k1)
        if (!std::isfinite(v)) throw NumericError("right-hand side not finite at the initial point");

    auto scale = [&](const StateN<N>& a, const StateN<N>& b, std::size_t i) {
        return opt.atol + opt.rtol * std::max(std::fabs(a[i]), std::fabs(b[i]));
    };

    double h = opt.h_init;
    if (h <= 0.0) {
        double dn0 = 0.0, dn1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = scale(y, y, i);
            dn0 += (y[i] / sc) * (y[i] / sc);
            dn1 += (k1[i] / sc) * (k1[i] / sc);
        }
        h = (dn0 > 1e-10 && dn1 > 1e-10) ? 0.01 * std::sqrt(dn0 / dn1) : 1e-6;
        h = std::min(h, h_max);
    }
    h *= dir;

    double t = t0;
    double facold = 1e-4;
    bool last_rejected = false;

    for (long step = 0; step < opt.max_steps; ++step) {
        if ((t - t_end) * dir >= 0.0) {
            res.t = t;
            res.y = y;
            res.status = IntegrateStatus::ReachedEnd;
            return res;
        }
        if (std::fabs(h) < 1e-14 * (1.0 + std::fabs(t))) {
            res.t = t;
            res.y = y;
            res.status = IntegrateStatus::StepUnderflow;
            return res;
        }
        if ((t + h - t_end) * dir > 0.0) h = t_end - t;
        if (std::fabs(h) > h_max) h = dir * h_max;

        StateN<N> k2, k3, k4, k5, k6, k7, y1;
        bool stage_ok = true;
        try {
            StateN<N> tmp;
            for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
            k2 = rhs(t + c2 * h, tmp);
            for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            k3 = rhs(t + c3 * h, tmp);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            k4 = rhs(t + c4 * h, tmp);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            k5 = rhs(t + c5 * h, tmp);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            k6 = rhs(t + h, tmp);
            for (std::size_t i = 0; i < N; ++i)
                y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            k7 = rhs(t + h, y1);
            for (std::size_t i = 0; i < N; ++i)
                if (!std::isfinite(y1[i]) || !std::isfinite(k7[i])) stage_ok = false;
        } catch (const std::runtime_error&) {
            stage_ok = false;
        }

        if (!stage_ok) {
            h *= 0.5;
            last_rejected = true;
            ++res.rejected;
            continue;
        }

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = scale(y, y1, i);
            err += (ei / sc) * (ei / sc);
        }
        err = std::sqrt(err / static_cast<double>(N));

        const double fac11 = std::pow(err, expo1);
        if (err <= 1.0) {
            ++res.accepted;
            DenseStep<N> dense;
            dense.t0 = t;
            dense.t1 = t + h;
            for (std::size_t i = 0; i < N; ++i) {
                const double ydiff = y1[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                dense.rcont[i][0] = y[i];
                dense.rcont[i][1] = ydiff;
                dense.rcont[i][2] = bspl;
                dense.rcont[i][3] = ydiff - h * k7[i] - bspl;
                dense.rcont[i][4] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                         d6 * k6[i] + d7 * k7[i]);
            }

            facold = std::max(err, 1e-4);
            double fac = fac11 / std::pow(facold, beta);
            fac = std::max(facc2, std::min(facc1, fac / safe));
            double hnew = h / fac;
            if (last_rejected) hnew = dir * std::min(std::fabs(hnew), std::fabs(h));
            last_rejected = false;

            t += h;
            y = y1;
            k1 = k7;
            h = hnew;

            if (observer(dense, y) == StepControl::Stop) {
                res.t = t;
                res.y = y;
                res.status = IntegrateStatus::StoppedByObserver;
                return res;
            }
        } else {
            ++res.rejected;
            h /= std::min(facc1, fac11 / safe);
            last_rejected = true;
        }
    }
    throw NumericError("integrator exceeded the step budget");
}

} // namespace hyperode

#endif
