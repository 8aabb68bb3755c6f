#ifndef HYPERODE_SOLUTIONS_HPP
#define HYPERODE_SOLUTIONS_HPP

#include <array>
#include <functional>
#include <memory>
#include <utility>

#include "hyperode/geodesic.hpp"

namespace hyperode {

// A solution of u'' + h u = 0 (or any scalar function) with its derivative,
// evaluable densely on [x_lo, x_hi].
struct DenseSolution {
    double x_lo = 0.0;
    double x_hi = 0.0;
    std::function<std::array<double, 2>(double)> eval_fn;  // (u, u')

    std::array<double, 2> operator()(double x) const {
        if (!(x >= x_lo && x <= x_hi)) throw EvalError("evaluation outside solution domain");
        return eval_fn(x);
    }
    double u(double x) const { return (*this)(x)[0]; }
    double du(double x) const { return (*this)(x)[1]; }

    static DenseSolution from_callable(double lo, double hi,
                                       std::function<std::array<double, 2>(double)> f) {
        return DenseSolution{lo, hi, std::move(f)};
    }
};

// Logarithmic derivatives of the two special solutions carried by a geodesic:
//   Theta_top = Phi (Phi' - L)/(h - Phi^2),  Theta_bot = Phi (Phi' + L)/(h - Phi^2),
// with L = sqrt((h - Phi^2)^2 + Phi'^2). The branch whose numerator cancels
// is computed in rationalized form. Both solve Theta' + Theta^2 + h = 0.
std::pair<double, double> theta(const HFunction& h, double phi, double phiprime, double x);

// Same quantities as jets in x: value and first derivative are exact given
// the curve jet (Phi, Phi', Phi''); the second component of the returned jets
// carries no meaning (the curve's third derivative is not available).
std::pair<Jet2, Jet2> theta_jets(const HFunction& h, double x, const Jet2& phi_jet);

// Pointwise evaluator of (Theta_top, Theta_bot) along a geodesic.
struct ThetaPair {
    HFunction h;
    std::shared_ptr<const ExplicitGeodesic> geo;

    std::pair<double, double> operator()(double x) const {
        const Jet2 p = geo->eval(x);
        return theta(h, p.v, p.d1, x);
    }
    double top(double x) const { return (*this)(x).first; }
    double bot(double x) const { return (*this)(x).second; }
};

// Working interior of a geodesic for verification sweeps: a fractional
// margin off the sampled ends, then trimmed to where the curve is moderate
// (Phi below cap_mult * (1 + Phi(x0)) and |Phi'| below rate_cap * (1 + Phi)).
// Toward the singular ends every representation degrades with the blow-up;
// how close the identities remain testable is a configuration choice.
std::pair<double, double> interior_probe_range(const ExplicitGeodesic& geo, double x0,
                                               double margin = 0.02, double cap_mult = 2.0,
                                               double rate_cap = 1.5);

// |Theta' + Theta^2 + h| for both branches at x, with Theta' obtained by
// exact differentiation through the curve jet.
std::pair<double, double> riccati_residual(const HFunction& h, const ExplicitGeodesic& geo,
                                           double x);

// Independent route check of the Riccati property: integrates
// theta' = -theta^2 - h from the anchor value of each branch and compares
// pointwise against the curve-built logarithmic derivatives on [lo, hi].
// Returns the max deviation scaled by 1 + |theta|. Differentiation-based
// residuals inherit an amplified noise floor from the dense data; this one
// is value-grade on both routes.
double riccati_route_residual(const HFunction& h, const ExplicitGeodesic& geo, double x0,
                              double lo, double hi, int probes = 64, double tol = 1e-12);

// The pair u_top/u_bot built from a geodesic by exponentiating cumulative
// quadrature of Theta_top/Theta_bot from the anchor x0 (where both equal 1).
class SolutionPair {
public:
    double x0() const;
    double wronskian() const;
    double domain_lo() const;
    double domain_hi() const;
    const ExplicitGeodesic& geodesic() const;
    const HFunction& h() const;

    double log_u_top(double x) const;
    double log_u_bot(double x) const;
    double u_top(double x) const;
    double u_bot(double x) const;
    double u_top_prime(double x) const;
    double u_bot_prime(double x) const;
    std::pair<double, double> theta_at(double x) const;

    DenseSolution dense_top() const;
    DenseSolution dense_bot() const;

    struct Impl;
    explicit SolutionPair(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<const Impl> impl_;
};

// Builds the pair on the sampled range of geo. panel_target is the absolute
// quadrature target per panel.
SolutionPair build_solution_pair(const HFunction& h, const ExplicitGeodesic& geo, double x0,
                                 double panel_target = 1e-11);

// max over xs of |Theta' + Theta^2 + h| * u for both members; u'' enters via
// the Riccati identity u'' = (Theta' + Theta^2) u.
double ode_residual(const HFunction& h, const SolutionPair& pair, const std::vector<double>& xs);

struct DirectSolveOptions {
    double max_dx = 0.002;
    long max_steps = 2000000;
};

// Independent oracle: adaptive RK on (u, u')' = (u', -h u) with dense output.
DenseSolution direct_solve(const HFunction& h, double x0, double u0, double uprime0,
                           std::array<double, 2> span, double tol = 1e-12,
                           const DirectSolveOptions& opts = {});

// Overload for coefficient functions that exist only as callables (used by
// the normal-form reduction, which composes quadrature with root finding).
DenseSolution direct_solve(const std::function<double(double)>& h_value, double x0, double u0,
                           double uprime0, std::array<double, 2> span, double tol = 1e-12,
                           const DirectSolveOptions& opts = {});

// Phi(x) = sqrt(-u1' u2' / (u1 u2)). Throws PreconditionError naming the
// failing factor when u1 u2 = 0 or the ratio is nonnegative.
double phi_from_pair(const DenseSolution& u1, const DenseSolution& u2, double x);

// Round trip of the inversion: build Phi from (u1, u2), rebuild the special
// pair anchored at x0, and compare u1, u2 against their scaled rebuilds.
struct ReconstructionReport {
    bool u1_is_top = true;          // branch selected by the sign of u1'/u1 at x0
    double max_rel_err_u1 = 0.0;
    double max_rel_err_u2 = 0.0;
    double product_residual = 0.0;  // max |Phi^2 u_top u_bot + u_top' u_bot'| (relative)
    double lo = 0.0, hi = 0.0;      // interval actually compared
};
ReconstructionReport verify_reconstruction(const HFunction& h, const DenseSolution& u1,
                                           const DenseSolution& u2, double x0);

// u = A u_top + B u_bot with derivative.
DenseSolution general_solution(const SolutionPair& pair, double A, double B);

// Normal-form reduction of (a(t) u')' + b(t) u = 0: x(t) = int_{t0}^t 1/a,
// t(x) by monotone root finding, h(x) = a(t(x)) b(t(x)).
class ReducedForm {
public:
    double t0() const;
    std::array<double, 2> t_span() const;
    std::array<double, 2> x_span() const;
    double x_of_t(double t) const;
    double t_of_x(double x) const;
    double h(double x) const;
    std::function<double(double)> h_callable() const;

    struct Impl;
    explicit ReducedForm(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<const Impl> impl_;
};

ReducedForm reduce_general(const HFunction& a, const HFunction& b, double t0,
                           std::array<double, 2> t_span);

} // namespace hyperode

#endif
