#include "hyperode/solutions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hyperode/quadrature.hpp"
#include "hyperode/rk45.hpp"

namespace hyperode {

std::pair<double, double> theta(const HFunction& h, double phi, double phiprime, double x) {
    if (!(phi > 0.0)) throw EvalError("theta requires phi > 0");
    const Jet2 hj = h.eval_jet(x);
    const double q = hj.v - phi * phi;  // h - Phi^2
    if (std::fabs(q) < degeneracy_margin(hj.v, phi))
        throw DegeneracyError("theta at the degeneracy locus");
    const double L = std::hypot(q, phiprime);
    // Phi' -+ L cancels catastrophically when Phi' has the matching sign and
    // |q| is small; multiply through by the conjugate on that branch.
    const double top = phiprime > 0.0 ? -phi * q / (phiprime + L) : phi * (phiprime - L) / q;
    const double bot = phiprime < 0.0 ? phi * q / (L - phiprime) : phi * (phiprime + L) / q;
    return {top, bot};
}

std::pair<Jet2, Jet2> theta_jets(const HFunction& h, double x, const Jet2& phi_jet) {
    if (!(phi_jet.v > 0.0)) throw EvalError("theta requires phi > 0");
    const Jet2 hj = h.eval_jet(x);
    const Jet2 phi = phi_jet;
    // The curve's third derivative is unknown; pad with zero. Only the value
    // and first derivative of the results are meaningful.
    const Jet2 dphi{phi_jet.d1, phi_jet.d2, 0.0};
    const Jet2 q = hj - phi * phi;
    if (std::fabs(q.v) < degeneracy_margin(hj.v, phi.v))
        throw DegeneracyError("theta at the degeneracy locus");
    const Jet2 L = sqrt(q * q + dphi * dphi);
    const Jet2 top = dphi.v > 0.0 ? -phi * q / (dphi + L) : phi * (dphi - L) / q;
    const Jet2 bot = dphi.v < 0.0 ? phi * q / (L - dphi) : phi * (dphi + L) / q;
    return {top, bot};
}

std::pair<double, double> interior_probe_range(const ExplicitGeodesic& geo, double x0,
                                               double margin, double cap_mult, double rate_cap) {
    double lo = geo.sample_lo(), hi = geo.sample_hi();
    const double m = margin * (hi - lo);
    lo += m;
    hi -= m;
    const double phi_cap = cap_mult * (1.0 + geo.eval(x0).v);
    auto moderate = [&](double x) {
        const Jet2 p = geo.eval(x);
        return p.v <= phi_cap && std::fabs(p.d1) <= rate_cap * (1.0 + p.v);
    };
    const double step = (hi - lo) / 400.0;
    while (lo < hi && !moderate(lo)) lo += step;
    while (hi > lo && !moderate(hi)) hi -= step;
    if (!(lo < hi)) throw NumericError("no moderate interior region to probe");
    return {lo, hi};
}

std::pair<double, double> riccati_residual(const HFunction& h, const ExplicitGeodesic& geo,
                                           double x) {
    const double hv = h.eval_jet(x).v;
    if (geo.exact) {
        // closed forms carry an exact second derivative
        const auto [top, bot] = theta_jets(h, x, geo.eval(x));
        return {std::fabs(top.d1 + top.v * top.v + hv), std::fabs(bot.d1 + bot.v * bot.v + hv)};
    }
    // Dense curves: the interpolant's second derivative carries an O(step^3)
    // defect of the dense output, so Theta' comes from five-point differences
    // of Theta itself (value-grade data); take the best-conditioned rung.
    auto theta_at = [&](double xx) {
        const Jet2 p = geo.eval(xx);
        return theta(h, p.v, p.d1, xx);
    };
    const auto th0 = theta_at(x);
    static constexpr double ladder[] = {0.0005, 0.001, 0.002, 0.004, 0.01, 0.025};
    double best_top = std::numeric_limits<double>::infinity();
    double best_bot = best_top;
    for (double d : ladder) {
        const double dx = d * (1.0 + std::fabs(x));
        if (x - 2.0 * dx < geo.sample_lo() || x + 2.0 * dx > geo.sample_hi()) continue;
        const auto f0 = theta_at(x - 2.0 * dx);
        const auto f1 = theta_at(x - dx);
        const auto f3 = theta_at(x + dx);
        const auto f4 = theta_at(x + 2.0 * dx);
        const double dtop = (f0.first - 8.0 * f1.first + 8.0 * f3.first - f4.first) / (12.0 * dx);
        const double dbot =
            (f0.second - 8.0 * f1.second + 8.0 * f3.second - f4.second) / (12.0 * dx);
        best_top = std::min(best_top, std::fabs(dtop + th0.first * th0.first + hv));
        best_bot = std::min(best_bot, std::fabs(dbot + th0.second * th0.second + hv));
    }
    if (!std::isfinite(best_top)) {
        const auto [top, bot] = theta_jets(h, x, geo.eval(x));
        return {std::fabs(top.d1 + top.v * top.v + hv), std::fabs(bot.d1 + bot.v * bot.v + hv)};
    }
    return {best_top, best_bot};
}

namespace {

// Dense scalar solution of theta' = -theta^2 - h from (x0, theta0).
CubicHermite integrate_riccati(const HFunction& h, double x0, double theta0,
                               std::array<double, 2> span, double tol) {
    auto rhs = [&](double x, const StateN<1>& y) -> StateN<1> {
        return {-y[0] * y[0] - h.eval_jet(x).v};
    };
    std::vector<double> xs{x0}, ths{theta0};
    for (const double target : {span[1], span[0]}) {
        std::vector<double> txs, tths;
        auto observer = [&](const DenseStep<1>& ds, const StateN<1>&) -> StepControl {
            const long m =
                std::max(1L, static_cast<long>(std::ceil(std::fabs(ds.t1 - ds.t0) / 0.002)));
            for (long j = 1; j <= m; ++j) {
                const double t =
                    ds.t0 + (ds.t1 - ds.t0) * static_cast<double>(j) / static_cast<double>(m);
                txs.push_back(t);
                tths.push_back(ds.eval(t)[0]);
            }
            return StepControl::Continue;
        };
        IntegrateOptions io;
        io.rtol = tol;
        io.atol = tol;
        const auto res = integrate_rk45<1>(rhs, x0, {theta0}, target, io, observer);
        if (res.status == IntegrateStatus::StepUnderflow)
            throw NumericError("riccati integration: step underflow");
        if (target == span[1]) {
            xs.insert(xs.end(), txs.begin(), txs.end());
            ths.insert(ths.end(), tths.begin(), tths.end());
        } else {
            xs.insert(xs.begin(), txs.rbegin(), txs.rend());
            ths.insert(ths.begin(), tths.rbegin(), tths.rend());
        }
    }
    // strictly increasing nodes (dedupe rounding twins)
    std::vector<double> cx;
    std::vector<double> cv, cd;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!cx.empty() && !(xs[i] > cx.back())) continue;
        cx.push_back(xs[i]);
        cv.push_back(ths[i]);
        cd.push_back(-ths[i] * ths[i] - h.eval_jet(xs[i]).v);
    }
    return CubicHermite(std::move(cx), std::move(cv), std::move(cd));
}

} // namespace

double riccati_route_residual(const HFunction& h, const ExplicitGeodesic& geo, double x0,
                              double lo, double hi, int probes, double tol) {
    auto theta_at = [&](double x) {
        const Jet2 p = geo.eval(x);
        return theta(h, p.v, p.d1, x);
    };
    const auto th0 = theta_at(x0);
    const CubicHermite top = integrate_riccati(h, x0, th0.first, {lo, hi}, tol);
    const CubicHermite bot = integrate_riccati(h, x0, th0.second, {lo, hi}, tol);
    double worst = 0.0;
    for (int i = 0; i <= probes; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / probes;
        const auto th = theta_at(x);
        const double rt = top.value(std::clamp(x, top.front(), top.back()));
        const double rb = bot.value(std::clamp(x, bot.front(), bot.back()));
        worst = std::max(worst, std::fabs(th.first - rt) / (1.0 + std::fabs(rt)));
        worst = std::max(worst, std::fabs(th.second - rb) / (1.0 + std::fabs(rb)));
    }
    return worst;
}

// --- SolutionPair -----------------------------------------------------------

struct SolutionPair::Impl {
    HFunction h;
    ExplicitGeodesic geo;
    double x0 = 0.0;
    double W = 0.0;
    double panel_target = 1e-11;
    std::vector<double> cum_top, cum_bot;  // anchored so the value at x0 is 0

    Impl(HFunction hf, ExplicitGeodesic g) : h(std::move(hf)), geo(std::move(g)) {}

    std::pair<double, double> theta_at(double x) const {
        const Jet2 p = geo.eval(x);
        return theta(h, p.v, p.d1, x);
    }

    std::size_t segment_of(double x) const {
        const auto& nodes = geo.curve.nodes();
        auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        std::size_t j = (it == nodes.begin()) ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
        if (j >= nodes.size() - 1) j = nodes.size() - 2;
        return j;
    }

    double log_member(double x, bool top) const {
        const auto& nodes = geo.curve.nodes();
        if (!(x >= nodes.front() && x <= nodes.back()))
            throw EvalError("evaluation outside solution domain");
        const std::size_t j = segment_of(x);
        auto f = [&](double xi) { return top ? theta_at(xi).first : theta_at(xi).second; };
        return (top ? cum_top : cum_bot)[j] + integrate(f, nodes[j], x, panel_target);
    }
};

double SolutionPair::x0() const { return impl_->x0; }
double SolutionPair::wronskian() const { return impl_->W; }
double SolutionPair::domain_lo() const { return impl_->geo.curve.front(); }
double SolutionPair::domain_hi() const { return impl_->geo.curve.back(); }
const ExplicitGeodesic& SolutionPair::geodesic() const { return impl_->geo; }
const HFunction& SolutionPair::h() const { return impl_->h; }
double SolutionPair::log_u_top(double x) const { return impl_->log_member(x, true); }
double SolutionPair::log_u_bot(double x) const { return impl_->log_member(x, false); }
double SolutionPair::u_top(double x) const { return std::exp(log_u_top(x)); }
double SolutionPair::u_bot(double x) const { return std::exp(log_u_bot(x)); }
double SolutionPair::u_top_prime(double x) const { return impl_->theta_at(x).first * u_top(x); }
double SolutionPair::u_bot_prime(double x) const { return impl_->theta_at(x).second * u_bot(x); }
std::pair<double, double> SolutionPair::theta_at(double x) const { return impl_->theta_at(x); }

DenseSolution SolutionPair::dense_top() const {
    auto impl = impl_;
    return DenseSolution::from_callable(domain_lo(), domain_hi(), [impl](double x) {
        const double u = std::exp(impl->log_member(x, true));
        return std::array<double, 2>{u, impl->theta_at(x).first * u};
    });
}

DenseSolution SolutionPair::dense_bot() const {
    auto impl = impl_;
    return DenseSolution::from_callable(domain_lo(), domain_hi(), [impl](double x) {
        const double u = std::exp(impl->log_member(x, false));
        return std::array<double, 2>{u, impl->theta_at(x).second * u};
    });
}

SolutionPair build_solution_pair(const HFunction& h, const ExplicitGeodesic& geo, double x0,
                                 double panel_target) {
    auto impl = std::make_shared<SolutionPair::Impl>(h, geo);
    impl->x0 = x0;
    impl->panel_target = panel_target;
    const auto& nodes = impl->geo.curve.nodes();
    if (!(x0 >= nodes.front() && x0 <= nodes.back()))
        throw PreconditionError("anchor x0 outside the geodesic domain");

    const std::size_t n = nodes.size();
    impl->cum_top.assign(n, 0.0);
    impl->cum_bot.assign(n, 0.0);
    auto f_top = [&](double xi) { return impl->theta_at(xi).first; };
    auto f_bot = [&](double xi) { return impl->theta_at(xi).second; };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        impl->cum_top[i + 1] = impl->cum_top[i] + integrate(f_top, nodes[i], nodes[i + 1], panel_target);
        impl->cum_bot[i + 1] = impl->cum_bot[i] + integrate(f_bot, nodes[i], nodes[i + 1], panel_target);
    }
    const std::size_t j0 = impl->segment_of(x0);
    const double off_top = impl->cum_top[j0] + integrate(f_top, nodes[j0], x0, panel_target);
    const double off_bot = impl->cum_bot[j0] + integrate(f_bot, nodes[j0], x0, panel_target);
    for (std::size_t i = 0; i < n; ++i) {
        impl->cum_top[i] -= off_top;
        impl->cum_bot[i] -= off_bot;
    }

    const auto th0 = impl->theta_at(x0);
    impl->W = th0.first - th0.second;  // Wronskian of (u_top, u_bot) at the anchor
    return SolutionPair(std::move(impl));
}

double ode_residual(const HFunction& h, const SolutionPair& pair, const std::vector<double>& xs) {
    double worst = 0.0;
    for (double x : xs) {
        const auto [rt, rb] = riccati_residual(h, pair.geodesic(), x);
        worst = std::max(worst, rt * pair.u_top(x));
        worst = std::max(worst, rb * pair.u_bot(x));
    }
    return worst;
}

// --- direct oracle ----------------------------------------------------------

namespace {

struct OracleSide {
    std::vector<double> xs, us, dus;
};

OracleSide run_oracle_side(const std::function<double(double)>& h_value, double x0, double u0,
                           double uprime0, double target, double tol,
                           const DirectSolveOptions& opts) {
    OracleSide side;
    side.xs.push_back(x0);
    side.us.push_back(u0);
    side.dus.push_back(uprime0);
    if (target == x0) return side;

    auto rhs = [&](double x, const StateN<2>& y) -> StateN<2> {
        return {y[1], -h_value(x) * y[0]};
    };
    const double dir = target > x0 ? 1.0 : -1.0;
    auto observer = [&](const DenseStep<2>& ds, const StateN<2>&) -> StepControl {
        const long m = std::max(1L, static_cast<long>(std::ceil(std::fabs(ds.t1 - ds.t0) / opts.max_dx)));
        for (long j = 1; j <= m; ++j) {
            const double t = ds.t0 + (ds.t1 - ds.t0) * static_cast<double>(j) / static_cast<double>(m);
            if ((t - side.xs.back()) * dir <= 0.0) continue;
            const auto y = ds.eval(t);
            side.xs.push_back(t);
            side.us.push_back(y[0]);
            side.dus.push_back(y[1]);
        }
        return StepControl::Continue;
    };

    IntegrateOptions io;
    io.rtol = tol;
    io.atol = tol;
    io.max_steps = opts.max_steps;
    const auto res = integrate_rk45<2>(rhs, x0, {u0, uprime0}, target, io, observer);
    if (res.status == IntegrateStatus::StepUnderflow)
        throw NumericError("direct solve: step size underflow");
    // make sure the reached endpoint itself is a node
    if ((res.t - side.xs.back()) * dir > 0.0) {
        side.xs.push_back(res.t);
        side.us.push_back(res.y[0]);
        side.dus.push_back(res.y[1]);
    }
    return side;
}

} // namespace

DenseSolution direct_solve(const std::function<double(double)>& h_value, double x0, double u0,
                           double uprime0, std::array<double, 2> span, double tol,
                           const DirectSolveOptions& opts) {
    if (!(tol > 0.0)) throw PreconditionError("tolerance must be positive");
    if (!(span[0] <= x0 && x0 <= span[1] && span[0] < span[1]))
        throw PreconditionError("span must contain x0 with nonzero width");

    const OracleSide right = run_oracle_side(h_value, x0, u0, uprime0, span[1], tol, opts);
    const OracleSide left = run_oracle_side(h_value, x0, u0, uprime0, span[0], tol, opts);

    std::vector<double> xs, us, dus;
    for (std::size_t i = left.xs.size(); i-- > 1;) {
        xs.push_back(left.xs[i]);
        us.push_back(left.us[i]);
        dus.push_back(left.dus[i]);
    }
    for (std::size_t i = 0; i < right.xs.size(); ++i) {
        xs.push_back(right.xs[i]);
        us.push_back(right.us[i]);
        dus.push_back(right.dus[i]);
    }
    if (xs.size() < 2) throw NumericError("direct solve produced no usable span");

    // u' gets its own interpolant with u'' = -h u as nodal derivative.
    std::vector<double> ddus(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ddus[i] = -h_value(xs[i]) * us[i];
    auto hu = std::make_shared<CubicHermite>(xs, us, dus);
    auto hdu = std::make_shared<CubicHermite>(xs, dus, ddus);
    // the last node can sit an ulp short of the requested span end; advertise
    // the requested span and clamp the rounding gap
    const double lo_node = xs.front(), hi_node = xs.back();
    return DenseSolution::from_callable(
        std::max(span[0], lo_node - 1e-8 * (1.0 + std::fabs(lo_node))),
        std::min(span[1], hi_node + 1e-8 * (1.0 + std::fabs(hi_node))),
        [hu, hdu, lo_node, hi_node](double x) {
            const double xc = std::clamp(x, lo_node, hi_node);
            return std::array<double, 2>{hu->value(xc), hdu->value(xc)};
        });
}

DenseSolution direct_solve(const HFunction& h, double x0, double u0, double uprime0,
                           std::array<double, 2> span, double tol, const DirectSolveOptions& opts) {
    return direct_solve([h](double x) { return h.eval_jet(x).v; }, x0, u0, uprime0, span, tol,
                        opts);
}

// --- inversion --------------------------------------------------------------

double phi_from_pair(const DenseSolution& u1, const DenseSolution& u2, double x) {
    const auto a = u1(x);
    const auto b = u2(x);
    if (a[0] == 0.0 || b[0] == 0.0)
        throw PreconditionError(a[0] == 0.0 ? "u1 vanishes at x" : "u2 vanishes at x");
    const double ratio = a[1] * b[1] / (a[0] * b[0]);
    if (!(ratio < 0.0))
        throw PreconditionError("u1' u2' / (u1 u2) is not negative at x");
    return std::sqrt(-ratio);
}

ReconstructionReport verify_reconstruction(const HFunction& h, const DenseSolution& u1,
                                           const DenseSolution& u2, double x0) {
    const double lo_all = std::max(u1.x_lo, u2.x_lo);
    const double hi_all = std::min(u1.x_hi, u2.x_hi);
    if (!(lo_all < x0 && x0 < hi_all))
        throw PreconditionError("x0 outside the common domain of u1 and u2");

    auto admissible = [&](double x) {
        try {
            const double phi = phi_from_pair(u1, u2, x);
            // stay clear of the degeneracy locus as well; theta is singular
            // there and the interval ends are where Phi drifts toward it
            const double hv = h.eval_jet(x).v;
            return std::fabs(phi * phi - hv) >= 1e-4 * (1.0 + phi * phi + std::fabs(hv));
        } catch (const PreconditionError&) {
            return false;
        } catch (const EvalError&) {
            return false;
        }
    };
    if (!admissible(x0)) throw PreconditionError("conditions on (u1, u2) fail at x0");

    // Scan outward for the admissible interval around x0, then keep a margin
    // away from its ends where the construction degenerates.
    const double scan = (hi_all - lo_all) / 2000.0;
    double lo = x0, hi = x0;
    while (hi + scan < hi_all && admissible(hi + scan)) hi += scan;
    while (lo - scan > lo_all && admissible(lo - scan)) lo -= scan;
    const double margin = 0.02 * (hi - lo);
    lo += margin;
    hi -= margin;
    if (!(lo < x0 && x0 < hi))
        throw PreconditionError("admissible interval around x0 is too narrow");

    // Phi and Phi' from the pair; Phi' via the logarithmic-derivative sum.
    auto phi_prime = [&](double x, double phi) {
        const auto a = u1(x);
        const auto b = u2(x);
        const double sigma = a[1] / a[0] + b[1] / b[0];
        const double hv = h.eval_jet(x).v;
        return sigma * (hv - phi * phi) / (2.0 * phi);
    };
    const std::size_t n = std::max<std::size_t>(64, static_cast<std::size_t>((hi - lo) / 0.001));
    std::vector<double> xs(n), phis(n), dphis(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double phi = phi_from_pair(u1, u2, x);
        xs[i] = x;
        phis[i] = phi;
        dphis[i] = phi_prime(x, phi);
    }
    ExplicitGeodesic geo;
    geo.x0 = x0;
    geo.x_minus = lo;
    geo.x_plus = hi;
    geo.left_stop = StopReason::SpanLimit;
    geo.right_stop = StopReason::SpanLimit;
    geo.curve = CubicHermite(std::move(xs), std::move(phis), std::move(dphis));

    const SolutionPair pair = build_solution_pair(h, geo, x0, 1e-12);

    ReconstructionReport rep;
    rep.lo = lo;
    rep.hi = hi;
    const double theta1_at_x0 = u1(x0)[1] / u1(x0)[0];
    rep.u1_is_top = (theta1_at_x0 > 0.0) == (pair.theta_at(x0).first > 0.0);

    const double u1_0 = u1(x0)[0];
    const double u2_0 = u2(x0)[0];
    const int m = 200;
    for (int i = 0; i <= m; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / m;
        const double ut = pair.u_top(x);
        const double ub = pair.u_bot(x);
        const double r1 = rep.u1_is_top ? u1_0 * ut : u1_0 * ub;
        const double r2 = rep.u1_is_top ? u2_0 * ub : u2_0 * ut;
        rep.max_rel_err_u1 = std::max(rep.max_rel_err_u1, std::fabs(u1(x)[0] - r1) / std::fabs(u1(x)[0]));
        rep.max_rel_err_u2 = std::max(rep.max_rel_err_u2, std::fabs(u2(x)[0] - r2) / std::fabs(u2(x)[0]));
        const double phi2 = pair.geodesic().eval(x).v;
        const double prod = phi2 * phi2 * ut * ub + pair.u_top_prime(x) * pair.u_bot_prime(x);
        rep.product_residual = std::max(rep.product_residual,
                                        std::fabs(prod) / (phi2 * phi2 * std::fabs(ut * ub)));
    }
    return rep;
}

DenseSolution general_solution(const SolutionPair& pair, double A, double B) {
    return DenseSolution::from_callable(pair.domain_lo(), pair.domain_hi(), [pair, A, B](double x) {
        return std::array<double, 2>{A * pair.u_top(x) + B * pair.u_bot(x),
                                     A * pair.u_top_prime(x) + B * pair.u_bot_prime(x)};
    });
}

// --- normal-form reduction ----------------------------------------------

struct ReducedForm::Impl {
    HFunction a, b;
    double t0 = 0.0;
    std::array<double, 2> tspan{};
    CubicHermite x_of_t;  // strictly monotone
    double sign = 1.0;    // sign of 1/a

    Impl(HFunction af, HFunction bf) : a(std::move(af)), b(std::move(bf)) {}

    double t_of_x(double x) const {
        const double x_front = x_of_t.values().front();
        const double x_back = x_of_t.values().back();
        const double xlo = std::min(x_front, x_back), xhi = std::max(x_front, x_back);
        if (!(x >= xlo && x <= xhi)) throw EvalError("x outside the reduced range");
        double tlo = x_of_t.front(), thi = x_of_t.back();
        // bisection on the monotone map, then a couple of Newton polishes
        for (int i = 0; i < 80; ++i) {
            const double mid = 0.5 * (tlo + thi);
            const bool left = (x_of_t.value(mid) < x) == (sign > 0.0);
            (left ? tlo : thi) = mid;
            if (thi - tlo < 1e-14 * (1.0 + std::fabs(tlo))) break;
        }
        double t = 0.5 * (tlo + thi);
        for (int i = 0; i < 3; ++i) {
            const double residual = x_of_t.value(t) - x;
            const double slope = 1.0 / a.eval_jet(t).v;
            const double next = t - residual / slope;
            if (next >= x_of_t.front() && next <= x_of_t.back()) t = next;
        }
        return t;
    }
};

double ReducedForm::t0() const { return impl_->t0; }
std::array<double, 2> ReducedForm::t_span() const { return impl_->tspan; }
std::array<double, 2> ReducedForm::x_span() const {
    const double xa = impl_->x_of_t.values().front();
    const double xb = impl_->x_of_t.values().back();
    return {std::min(xa, xb), std::max(xa, xb)};
}
double ReducedForm::x_of_t(double t) const { return impl_->x_of_t.value(t); }
double ReducedForm::t_of_x(double x) const { return impl_->t_of_x(x); }
double ReducedForm::h(double x) const {
    const double t = impl_->t_of_x(x);
    return impl_->a.eval_jet(t).v * impl_->b.eval_jet(t).v;
}
std::function<double(double)> ReducedForm::h_callable() const {
    auto impl = impl_;
    return [impl](double x) {
        const double t = impl->t_of_x(x);
        return impl->a.eval_jet(t).v * impl->b.eval_jet(t).v;
    };
}

ReducedForm reduce_general(const HFunction& a, const HFunction& b, double t0,
                           std::array<double, 2> t_span) {
    if (!(t_span[0] <= t0 && t0 <= t_span[1] && t_span[0] < t_span[1]))
        throw PreconditionError("t_span must contain t0 with nonzero width");
    auto impl = std::make_shared<ReducedForm::Impl>(a, b);
    impl->t0 = t0;
    impl->tspan = t_span;

    const double width = t_span[1] - t_span[0];
    const std::size_t n =
        std::clamp<std::size_t>(static_cast<std::size_t>(width / 0.002), 512, 500000);
    std::vector<double> ts(n), xs(n), slopes(n);
    const double a0 = a.eval_jet(t0).v;
    if (a0 == 0.0) throw EvalError("a vanishes at t0");
    impl->sign = a0 > 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        ts[i] = t_span[0] + width * static_cast<double>(i) / static_cast<double>(n - 1);
        const double av = a.eval_jet(ts[i]).v;
        if (av == 0.0 || (av > 0.0) != (a0 > 0.0))
            throw EvalError("a vanishes inside the working interval");
        slopes[i] = 1.0 / av;
    }
    auto inv_a = [&](double t) { return 1.0 / a.eval_jet(t).v; };
    xs[0] = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        xs[i + 1] = xs[i] + integrate(inv_a, ts[i], ts[i + 1], 1e-12);
    // anchor x(t0) = 0
    std::size_t j0 = static_cast<std::size_t>((t0 - t_span[0]) / width * static_cast<double>(n - 1));
    j0 = std::min(j0, n - 2);
    const double off = xs[j0] + integrate(inv_a, ts[j0], t0, 1e-12);
    for (auto& v : xs) v -= off;

    for (std::size_t i = 0; i + 1 < n; ++i)
        if ((xs[i + 1] - xs[i]) * impl->sign <= 0.0)
            throw NumericError("x(t) is not strictly monotone");

    if (impl->sign < 0.0) {
        // CubicHermite needs increasing abscissae; store against t and flip
        // queries in t_of_x instead. t is already increasing, so nothing to
        // do: monotonicity of x is what matters for inversion.
    }
    impl->x_of_t = CubicHermite(std::move(ts), std::move(xs), std::move(slopes));
    return ReducedForm(std::move(impl));
}

} // namespace hyperode
