#include "hyperode/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hyperode/quadrature.hpp"
#include "hyperode/rk45.hpp"

namespace hyperode {

namespace {

constexpr double kPhiFloor = 1e-9;

// Event codes checked along integrations.
enum EventCode { kNone = 0, kDegenerate = 1, kPhiZero = 2, kBlowUp = 3, kUnevaluable = 4 };

StopReason stop_reason_for(int code) {
    switch (code) {
        case kDegenerate: return StopReason::DegeneracyLocus;
        case kPhiZero: return StopReason::PhiZero;
        default: return StopReason::StepUnderflow;
    }
}

} // namespace

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::ReachedEnd: return "reached-end";
        case StopReason::DegeneracyLocus: return "degeneracy-locus";
        case StopReason::PhiZero: return "phi-zero";
        case StopReason::XdotZero: return "xdot-zero";
        case StopReason::StepUnderflow: return "step-underflow";
        case StopReason::SpanLimit: return "span-limit";
    }
    return "?";
}

double geodesic_speed(const HFunction& h, const GeodesicState& st) {
    const double hv = h.eval_jet(st.x).v;
    const double gap = hv - st.phi * st.phi;
    return (gap * gap * st.xdot * st.xdot + st.phidot * st.phidot) / (st.phi * st.phi);
}

std::array<double, 4> geodesic_rhs(const HFunction& h, const GeodesicState& st) {
    if (!(st.phi > 0.0)) throw EvalError("geodesic state has phi <= 0");
    const Jet2 hj = h.eval_jet(st.x);
    const double phi2 = st.phi * st.phi;
    const double q = phi2 - hj.v;  // phi^2 - h
    if (std::fabs(q) < degeneracy_margin(hj.v, st.phi))
        throw DegeneracyError("geodesic state on the degeneracy locus");
    const double xdd =
        hj.d1 / q * st.xdot * st.xdot - 2.0 * (phi2 + hj.v) / (st.phi * q) * st.xdot * st.phidot;
    const double phidd = (phi2 * phi2 - hj.v * hj.v) / st.phi * st.xdot * st.xdot +
                         st.phidot * st.phidot / st.phi;
    return {st.xdot, st.phidot, xdd, phidd};
}

double explicit_rhs(const HFunction& h, double x, double phi, double phiprime) {
    if (!(phi > 0.0)) throw EvalError("explicit-form state has phi <= 0");
    const Jet2 hj = h.eval_jet(x);
    const double phi2 = phi * phi;
    const double q = phi2 - hj.v;
    if (std::fabs(q) < degeneracy_margin(hj.v, phi))
        throw DegeneracyError("explicit-form state on the degeneracy locus");
    return (3.0 * phi2 + hj.v) / q * phiprime * phiprime / phi - hj.d1 * phiprime / q +
           (phi2 * phi2 - hj.v * hj.v) / phi;
}

GeodesicState GeodesicTrajectory::eval(double s_at) const {
    return {x_of_s.value(s_at), phi_of_s.value(s_at), xdot_of_s.value(s_at),
            phidot_of_s.value(s_at)};
}

namespace {

// --- parametric integration -------------------------------------------------

struct ParametricSide {
    std::vector<double> s;
    std::vector<GeodesicState> states;
    StopReason stop = StopReason::ReachedEnd;
};

int classify_point(const HFunction& h, double x, double phi, double dphi_for_blowup,
                   double phi_max, double dphi_max) {
    if (phi < kPhiFloor) return kPhiZero;
    if (phi > phi_max || std::fabs(dphi_for_blowup) > dphi_max) return kBlowUp;
    double hv;
    try {
        hv = h.eval_jet(x).v;
    } catch (const std::runtime_error&) {
        return kUnevaluable;
    }
    if (std::fabs(phi * phi - hv) < degeneracy_margin(hv, phi)) return kDegenerate;
    return kNone;
}

// Bisects [t_ok, t_bad] for the earliest event to the requested width;
// returns the event-free end of the final bracket.
template <typename Bad>
double bisect_inside(double t_ok, double t_bad, Bad bad) {
    const double width = 1e-12 * (1.0 + std::fabs(t_bad));
    while (std::fabs(t_bad - t_ok) > width) {
        const double mid = 0.5 * (t_ok + t_bad);
        if (bad(mid))
            t_bad = mid;
        else
            t_ok = mid;
    }
    return t_ok;
}

ParametricSide run_parametric_side(const HFunction& h, const GeodesicState& init, double s_target,
                                   double tol, const GeodesicOptions& opts) {
    ParametricSide side;
    side.s.push_back(0.0);
    side.states.push_back(init);
    if (s_target == 0.0) return side;

    auto rhs = [&](double, const StateN<4>& y) -> StateN<4> {
        const auto d = geodesic_rhs(h, GeodesicState{y[0], y[1], y[2], y[3]});
        return {d[0], d[1], d[2], d[3]};
    };

    int event = kNone;
    const double dir = s_target > 0.0 ? 1.0 : -1.0;
    auto observer = [&](const DenseStep<4>& ds, const StateN<4>&) -> StepControl {
        const long m = std::max(1L, static_cast<long>(std::ceil(std::fabs(ds.t1 - ds.t0) / opts.max_ds)));
        double prev = ds.t0;
        for (long j = 1; j <= m; ++j) {
            const double t = ds.t0 + (ds.t1 - ds.t0) * static_cast<double>(j) / static_cast<double>(m);
            const auto y = ds.eval(t);
            const int code = classify_point(h, y[0], y[1], 0.0, 1e300, 1e300);
            if (code != kNone) {
                event = code;
                auto bad = [&](double tt) {
                    const auto yy = ds.eval(tt);
                    return classify_point(h, yy[0], yy[1], 0.0, 1e300, 1e300) != kNone;
                };
                const double t_in = bisect_inside(prev, t, bad);
                if ((t_in - side.s.back()) * dir > 0.0) {
                    const auto yin = ds.eval(t_in);
                    side.s.push_back(t_in);
                    side.states.push_back({yin[0], yin[1], yin[2], yin[3]});
                }
                return StepControl::Stop;
            }
            if ((t - side.s.back()) * dir > 0.0) {
                side.s.push_back(t);
                side.states.push_back({y[0], y[1], y[2], y[3]});
            }
            prev = t;
        }
        return StepControl::Continue;
    };

    IntegrateOptions io;
    io.rtol = tol > 0.0 ? tol : opts.rtol;
    io.atol = tol > 0.0 ? tol : opts.atol;
    io.h_max = opts.max_step;
    io.max_steps = opts.max_steps;
    const StateN<4> y0{init.x, init.phi, init.xdot, init.phidot};
    const auto res = integrate_rk45<4>(rhs, 0.0, y0, s_target, io, observer);

    if (event != kNone)
        side.stop = stop_reason_for(event);
    else if (res.status == IntegrateStatus::StepUnderflow) {
        const int code = classify_point(h, res.y[0], res.y[1], 0.0, 1e300, 1e300);
        side.stop = code != kNone ? stop_reason_for(code) : StopReason::StepUnderflow;
        if ((res.t - side.s.back()) * dir > 0.0) {
            side.s.push_back(res.t);
            side.states.push_back({res.y[0], res.y[1], res.y[2], res.y[3]});
        }
    } else
        side.stop = StopReason::ReachedEnd;
    return side;
}

} // namespace

GeodesicTrajectory integrate_geodesic(const HFunction& h, const GeodesicState& init,
                                      std::array<double, 2> s_span, double tol,
                                      const GeodesicOptions& opts) {
    if (!(s_span[0] <= 0.0 && s_span[1] >= 0.0 && s_span[0] < s_span[1]))
        throw NumericError("s_span must contain 0 with nonzero width");
    if (!(init.phi > 0.0)) throw EvalError("initial phi must be positive");
    require_nondegenerate(h, MhPoint{init.x, init.phi});

    const ParametricSide fwd = run_parametric_side(h, init, s_span[1], tol, opts);
    const ParametricSide bwd = run_parametric_side(h, init, s_span[0], tol, opts);

    GeodesicTrajectory traj;
    traj.termination = fwd.stop;
    traj.backward_termination = bwd.stop;
    for (std::size_t i = bwd.s.size(); i-- > 1;) {
        traj.s.push_back(bwd.s[i]);
        traj.states.push_back(bwd.states[i]);
    }
    for (std::size_t i = 0; i < fwd.s.size(); ++i) {
        traj.s.push_back(fwd.s[i]);
        traj.states.push_back(fwd.states[i]);
    }

    const std::size_t n = traj.s.size();
    if (n < 2) throw NumericError("trajectory collapsed to a single point");
    std::vector<double> xs(n), phis(n), xds(n), pds(n), xdds(n), pdds(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = traj.states[i].x;
        phis[i] = traj.states[i].phi;
        xds[i] = traj.states[i].xdot;
        pds[i] = traj.states[i].phidot;
        const auto d = geodesic_rhs(h, traj.states[i]);
        xdds[i] = d[2];
        pdds[i] = d[3];
    }
    traj.x_of_s = CubicHermite(traj.s, xs, xds);
    traj.phi_of_s = CubicHermite(traj.s, phis, pds);
    traj.xdot_of_s = CubicHermite(traj.s, xds, xdds);
    traj.phidot_of_s = CubicHermite(traj.s, pds, pdds);
    return traj;
}

// --- explicit-form integration ----------------------------------------------

Jet2 ExplicitGeodesic::eval(double x) const {
    if (exact) {
        if (!(x > x_minus && x < x_plus)) throw EvalError("evaluation outside geodesic domain");
        return exact(x);
    }
    return {curve.value(x), curve.derivative(x), curve.second_derivative(x)};
}

namespace {

struct ExplicitSide {
    std::vector<double> xs, phis, dphis;
    double endpoint = 0.0;
    StopReason stop = StopReason::SpanLimit;
};

ExplicitSide run_explicit_side(const HFunction& h, double x0, double phi0, double dphi0,
                               double dir, double tol, const ExplicitOptions& opts) {
    ExplicitSide side;
    side.xs.push_back(x0);
    side.phis.push_back(phi0);
    side.dphis.push_back(dphi0);

    auto rhs = [&](double x, const StateN<2>& y) -> StateN<2> {
        return {y[1], explicit_rhs(h, x, y[0], y[1])};
    };
    auto classify = [&](double x, double phi, double dphi) {
        return classify_point(h, x, phi, dphi, opts.phi_max, opts.dphi_max);
    };

    int event = kNone;
    auto observer = [&](const DenseStep<2>& ds, const StateN<2>&) -> StepControl {
        const long m = std::max(1L, static_cast<long>(std::ceil(std::fabs(ds.t1 - ds.t0) / opts.max_dx)));
        double prev = ds.t0;
        for (long j = 1; j <= m; ++j) {
            const double t = ds.t0 + (ds.t1 - ds.t0) * static_cast<double>(j) / static_cast<double>(m);
            const auto y = ds.eval(t);
            const int code = classify(t, y[0], y[1]);
            if (code != kNone) {
                event = code;
                auto bad = [&](double tt) {
                    const auto yy = ds.eval(tt);
                    return classify(tt, yy[0], yy[1]) != kNone;
                };
                const double t_in = bisect_inside(prev, t, bad);
                if ((t_in - side.xs.back()) * dir > 0.0) {
                    const auto yin = ds.eval(t_in);
                    side.xs.push_back(t_in);
                    side.phis.push_back(yin[0]);
                    side.dphis.push_back(yin[1]);
                }
                side.endpoint = t_in;
                return StepControl::Stop;
            }
            if ((t - side.xs.back()) * dir > 0.0) {
                side.xs.push_back(t);
                side.phis.push_back(y[0]);
                side.dphis.push_back(y[1]);
            }
            prev = t;
        }
        return StepControl::Continue;
    };

    IntegrateOptions io;
    io.rtol = tol > 0.0 ? tol : opts.rtol;
    io.atol = tol > 0.0 ? tol : opts.atol;
    io.h_max = opts.max_step;
    io.max_steps = opts.max_steps;
    const double target = x0 + dir * opts.max_halfwidth;
    const auto res = integrate_rk45<2>(rhs, x0, {phi0, dphi0}, target, io, observer);

    if (event != kNone) {
        side.stop = stop_reason_for(event);
    } else if (res.status == IntegrateStatus::StepUnderflow) {
        // The singular boundary shows up as step collapse; classify by what
        // the final state is close to.
        double hv = 0.0;
        bool evaluable = true;
        try {
            hv = h.eval_jet(res.t).v;
        } catch (const std::runtime_error&) {
            evaluable = false;
        }
        const double phi = res.y[0];
        if (evaluable && std::fabs(phi * phi - hv) < 1e6 * degeneracy_margin(hv, phi))
            side.stop = StopReason::DegeneracyLocus;
        else if (phi < 1e3 * kPhiFloor)
            side.stop = StopReason::PhiZero;
        else
            side.stop = StopReason::StepUnderflow;
        side.endpoint = res.t;
        if ((res.t - side.xs.back()) * dir > 0.0) {
            side.xs.push_back(res.t);
            side.phis.push_back(res.y[0]);
            side.dphis.push_back(res.y[1]);
        }
    } else {
        side.stop = StopReason::SpanLimit;
        side.endpoint = target;
    }
    return side;
}

ExplicitGeodesic assemble_explicit(double x0, const ExplicitSide& left, const ExplicitSide& right) {
    std::vector<double> xs, phis, dphis;
    xs.reserve(left.xs.size() + right.xs.size());
    phis.reserve(xs.capacity());
    dphis.reserve(xs.capacity());
    for (std::size_t i = left.xs.size(); i-- > 1;) {
        xs.push_back(left.xs[i]);
        phis.push_back(left.phis[i]);
        dphis.push_back(left.dphis[i]);
    }
    for (std::size_t i = 0; i < right.xs.size(); ++i) {
        xs.push_back(right.xs[i]);
        phis.push_back(right.phis[i]);
        dphis.push_back(right.dphis[i]);
    }
    if (xs.size() < 2) throw NumericError("explicit geodesic collapsed to a single point");

    ExplicitGeodesic geo;
    geo.x0 = x0;
    geo.left_stop = left.stop;
    geo.right_stop = right.stop;
    geo.x_minus = left.stop == StopReason::SpanLimit ? -std::numeric_limits<double>::infinity()
                                                     : left.endpoint;
    geo.x_plus = right.stop == StopReason::SpanLimit ? std::numeric_limits<double>::infinity()
                                                     : right.endpoint;
    geo.curve = CubicHermite(std::move(xs), std::move(phis), std::move(dphis));
    return geo;
}

} // namespace

ExplicitGeodesic integrate_explicit(const HFunction& h, double x0, double phi0, double phiprime0,
                                    double tol, const ExplicitOptions& opts) {
    if (!(phi0 > 0.0)) throw EvalError("initial phi must be positive");
    require_nondegenerate(h, MhPoint{x0, phi0});
    const ExplicitSide right = run_explicit_side(h, x0, phi0, phiprime0, +1.0, tol, opts);
    const ExplicitSide left = run_explicit_side(h, x0, phi0, phiprime0, -1.0, tol, opts);
    return assemble_explicit(x0, left, right);
}

ExplicitGeodesic explicit_from_parametric(const GeodesicTrajectory& traj, const HFunction& h,
                                          double max_dx) {
    (void)h;
    const GeodesicState at0 = traj.eval(0.0);
    if (at0.xdot == 0.0)
        throw PreconditionError("xdot vanishes at s = 0: the geodesic is vertical there");
    const double sign0 = at0.xdot > 0.0 ? 1.0 : -1.0;

    double xdot_scale = 0.0;
    for (const auto& st : traj.states) xdot_scale = std::max(xdot_scale, std::fabs(st.xdot));
    const double floor = 1e-9 * xdot_scale;
    if (std::fabs(at0.xdot) <= floor)
        throw PreconditionError("xdot at s = 0 is negligible relative to the trajectory");

    // Locate the anchor node (s = 0 is always a node).
    const auto it0 = std::lower_bound(traj.s.begin(), traj.s.end(), 0.0);
    std::size_t i0 = static_cast<std::size_t>(it0 - traj.s.begin());
    if (i0 >= traj.s.size() || std::fabs(traj.s[i0]) > 1e-12) {
        if (i0 > 0 && std::fabs(traj.s[i0 - 1]) <= 1e-12) --i0;
    }

    auto usable = [&](std::size_t i) {
        const double xd = traj.states[i].xdot;
        return xd * sign0 > floor;
    };

    std::size_t lo = i0, hi = i0;
    while (lo > 0 && usable(lo - 1)) --lo;
    while (hi + 1 < traj.s.size() && usable(hi + 1)) ++hi;
    if (hi == lo) throw PreconditionError("no sub-span with xdot bounded away from zero");

    // Refine the s-boundaries where xdot crosses the floor.
    auto refine = [&](std::size_t inside, std::size_t outside) -> double {
        double s_in = traj.s[inside], s_out = traj.s[outside];
        for (int i = 0; i < 80 && std::fabs(s_out - s_in) > 1e-13 * (1.0 + std::fabs(s_in)); ++i) {
            const double mid = 0.5 * (s_in + s_out);
            if (traj.xdot_of_s.value(mid) * sign0 > floor)
                s_in = mid;
            else
                s_out = mid;
        }
        return s_in;
    };
    double s_lo = traj.s[lo];
    double s_hi = traj.s[hi];
    StopReason lo_stop = StopReason::XdotZero, hi_stop = StopReason::XdotZero;
    if (lo == 0)
        lo_stop = traj.backward_termination == StopReason::ReachedEnd ? StopReason::SpanLimit
                                                                      : traj.backward_termination;
    else
        s_lo = refine(lo, lo - 1);
    if (hi == traj.s.size() - 1)
        hi_stop = traj.termination == StopReason::ReachedEnd ? StopReason::SpanLimit
                                                             : traj.termination;
    else
        s_hi = refine(hi, hi + 1);

    // Sample the sub-span, subdividing so x-spacing stays below max_dx.
    std::vector<double> xs, phis, dphis;
    auto push_state = [&](double s) {
        const GeodesicState st = traj.eval(s);
        if (!xs.empty() && std::fabs(st.x - xs.back()) < 1e-13 * (1.0 + std::fabs(st.x))) return;
        xs.push_back(st.x);
        phis.push_back(st.phi);
        dphis.push_back(st.phidot / st.xdot);
    };
    push_state(s_lo);
    for (std::size_t i = lo; i < hi; ++i) {
        const double sa = std::max(traj.s[i], s_lo);
        const double sb = std::min(traj.s[i + 1], s_hi);
        if (!(sb > sa)) continue;
        const double dx_seg = std::fabs(traj.states[i + 1].x - traj.states[i].x);
        const long m = std::max(1L, static_cast<long>(std::ceil(dx_seg / max_dx)));
        for (long j = 1; j <= m; ++j) push_state(sa + (sb - sa) * static_cast<double>(j) / static_cast<double>(m));
    }
    push_state(s_hi);
    if (xs.size() < 2) throw PreconditionError("sub-span too short to reparametrize");

    if (sign0 < 0.0) {
        std::reverse(xs.begin(), xs.end());
        std::reverse(phis.begin(), phis.end());
        std::reverse(dphis.begin(), dphis.end());
        std::swap(lo_stop, hi_stop);
    }

    ExplicitGeodesic geo;
    geo.x0 = at0.x;
    geo.left_stop = lo_stop;
    geo.right_stop = hi_stop;
    geo.curve = CubicHermite(std::move(xs), std::move(phis), std::move(dphis));
    geo.x_minus = geo.left_stop == StopReason::SpanLimit ? -std::numeric_limits<double>::infinity()
                                                         : geo.curve.front();
    geo.x_plus = geo.right_stop == StopReason::SpanLimit ? std::numeric_limits<double>::infinity()
                                                         : geo.curve.back();
    return geo;
}

// --- closed forms -------------------------------------------------------

namespace {

ExplicitGeodesic sample_closed_form(std::function<Jet2(double)> exact, double x_minus,
                                    double x_plus, double lo, double hi, double x0,
                                    StopReason left, StopReason right, double max_dx) {
    std::vector<double> xs, phis, dphis;
    double x = lo;
    const std::size_t node_cap = 2000000;
    while (x < hi && xs.size() < node_cap) {
        const Jet2 p = exact(x);
        xs.push_back(x);
        phis.push_back(p.v);
        dphis.push_back(p.d1);
        // Slow down where the curve steepens so the Hermite error stays small.
        const double step = std::min(max_dx, 0.05 * (1.0 + std::fabs(p.v)) / (1.0 + std::fabs(p.d1)));
        if (step < 1e-12 * (1.0 + std::fabs(x))) break;
        x += step;
    }
    if (xs.empty() || xs.back() < hi) {
        const Jet2 p = exact(hi);
        xs.push_back(hi);
        phis.push_back(p.v);
        dphis.push_back(p.d1);
    }
    ExplicitGeodesic geo;
    geo.x0 = x0;
    geo.x_minus = x_minus;
    geo.x_plus = x_plus;
    geo.left_stop = left;
    geo.right_stop = right;
    geo.curve = CubicHermite(std::move(xs), std::move(phis), std::move(dphis));
    geo.exact = std::move(exact);
    return geo;
}

} // namespace

ExplicitGeodesic closed_form_geodesic(const ClosedFormKind& kind, double max_dx,
                                      double span_halfwidth) {
    if (const auto* z = std::get_if<ZeroGeodesic>(&kind)) {
        if (z->C1 == 0.0) throw PreconditionError("C1 must be nonzero");
        const double c1 = std::fabs(z->C1), c2 = z->C2;
        const Expression e = parse("1/sqrt(C1^2-(x+C2)^2)");
        const std::map<std::string, double> b{{"C1", c1}, {"C2", c2}};
        auto exact = [e, b](double x) { return e.eval(Jet2::variable(x), b); };
        const double x_minus = -c1 - c2, x_plus = c1 - c2;
        // Trim where Phi passes 1e4; the Hermite table only backs quadrature
        // panels, the exact form handles evaluation.
        const double trim = 0.5e-8 / c1;
        return sample_closed_form(exact, x_minus, x_plus, x_minus + trim, x_plus - trim, -c2,
                                  StopReason::StepUnderflow, StopReason::StepUnderflow, max_dx);
    }
    if (const auto* m = std::get_if<MinusOmega2Geodesic>(&kind)) {
        if (!(m->omega > 0.0)) throw PreconditionError("omega must be positive");
        const double w = m->omega;
        auto exact = [w](double) { return Jet2::constant(w); };
        return sample_closed_form(exact, -std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity(), -span_halfwidth,
                                  span_halfwidth, 0.0, StopReason::SpanLimit,
                                  StopReason::SpanLimit, max_dx);
    }
    const auto& p = std::get<PlusOmega2Geodesic>(kind);
    if (!(p.omega > 0.0)) throw PreconditionError("omega must be positive");
    const double half_period = M_PI / (2.0 * p.omega);
    if (!(p.xtilde > 0.0 && p.xtilde < half_period))
        throw PreconditionError("xtilde must lie in ]0, pi/(2 omega)[");
    const double x_minus = p.k * half_period + p.xbar + p.xtilde;
    const double x_plus = p.xbar + (p.k + 1) * half_period;
    const Expression e = parse("omega*sqrt(tan(omega*(x-xbar))/tan(omega*(x-xbar-xtilde)))");
    const std::map<std::string, double> b{
        {"omega", p.omega}, {"xbar", p.xbar}, {"xtilde", p.xtilde}};
    auto exact = [e, b](double x) { return e.eval(Jet2::variable(x), b); };
    const double width = x_plus - x_minus;
    const double trim = 1e-9 * width;
    return sample_closed_form(exact, x_minus, x_plus, x_minus + trim, x_plus - trim,
                              0.5 * (x_minus + x_plus), StopReason::StepUnderflow,
                              StopReason::StepUnderflow, max_dx);
}

double integral_form_residual(const HFunction& h, const ExplicitGeodesic& geo, double a,
                              double b) {
    auto rhs = [&](double x) {
        const Jet2 p = geo.eval(x);
        return explicit_rhs(h, x, p.v, p.d1);
    };
    const double dphi = geo.eval(b).d1 - geo.eval(a).d1;
    const double integral = integrate(rhs, a, b, 1e-12);
    return std::fabs(dphi - integral) / (1.0 + std::fabs(dphi));
}

double explicit_form_residual(const HFunction& h, const std::function<double(double)>& phi_of_x,
                              double x, double step_scale) {
    static constexpr double ladder[] = {0.005, 0.01, 0.02, 0.04, 0.08};
    double best = std::numeric_limits<double>::infinity();
    for (double d : ladder) {
        const double dx = d * step_scale * (1.0 + std::fabs(x));
        double f[5];
        try {
            for (int i = 0; i < 5; ++i) f[i] = phi_of_x(x + (i - 2) * dx);
        } catch (const std::runtime_error&) {
            continue;  // stencil left the domain; try a narrower rung
        }
        const double d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * dx);
        const double d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * dx * dx);
        double rhs;
        try {
            rhs = explicit_rhs(h, x, f[2], d1);
        } catch (const std::runtime_error&) {
            continue;
        }
        best = std::min(best, std::fabs(d2 - rhs) / (1.0 + std::fabs(rhs)));
    }
    if (!std::isfinite(best)) throw NumericError("residual stencil never fit inside the domain");
    return best;
}

} // namespace hyperode
