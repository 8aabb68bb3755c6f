#ifndef HYPERODE_GEODESIC_HPP
#define HYPERODE_GEODESIC_HPP

#include <array>
#include <functional>
#include <variant>
#include <vector>

#include "hyperode/expr.hpp"
#include "hyperode/geometry.hpp"
#include "hyperode/hermite.hpp"

namespace hyperode {

// Phase-space state of a geodesic of M_h with respect to the affine
// parameter s.
struct GeodesicState {
    double x = 0.0;
    double phi = 1.0;
    double xdot = 0.0;
    double phidot = 0.0;
};

// Why an integration (or one side of it) ended.
enum class StopReason {
    ReachedEnd,      // integrated through the requested span
    DegeneracyLocus, // approached phi^2 = h(x)
    PhiZero,         // approached the phi = 0 boundary
    XdotZero,        // xdot reached zero (explicit reparametrization only)
    StepUnderflow,   // step size collapsed (singular growth)
    SpanLimit,       // hit the configured span cap; domain continues beyond
};

const char* to_string(StopReason r);

// Sampled geodesic s -> (x, phi, xdot, phidot) with cubic-Hermite dense
// output per component.
struct GeodesicTrajectory {
    std::vector<double> s;
    std::vector<GeodesicState> states;
    StopReason termination = StopReason::ReachedEnd;
    StopReason backward_termination = StopReason::ReachedEnd;

    GeodesicState eval(double s_at) const;
    double s_begin() const { return s.front(); }
    double s_end() const { return s.back(); }

    // dense interpolants (value + derivative pairs share nodes)
    CubicHermite x_of_s, phi_of_s, xdot_of_s, phidot_of_s;
};

// g(gamma', gamma') = [ (h - phi^2)^2 xdot^2 + phidot^2 ] / phi^2, conserved
// along geodesics.
double geodesic_speed(const HFunction& h, const GeodesicState& st);

// Right-hand side of the geodesic system: returns (xdot, phidot, xddot,
// phiddot).
std::array<double, 4> geodesic_rhs(const HFunction& h, const GeodesicState& st);

struct GeodesicOptions {
    double rtol = 1e-12;
    double atol = 1e-12;
    double max_ds = 0.002;   // dense-node spacing cap
    double max_step = 0.02;  // integrator step cap; bounds the dense-output bias
    long max_steps = 2000000;
};

// Integrates the geodesic system over s_span (which must contain 0, where
// init is posed). Stops early on degeneracy, phi -> 0, or step underflow.
GeodesicTrajectory integrate_geodesic(const HFunction& h, const GeodesicState& init,
                                      std::array<double, 2> s_span, double tol = 1e-12,
                                      const GeodesicOptions& opts = {});

// Geodesic as a graph phi = Phi(x) on its maximal interval ]x_minus, x_plus[.
// Dense nodes cover a hair less than the full interval; eval() uses the exact
// closed form when one is attached, the Hermite interpolant otherwise, and
// returns the jet (Phi, Phi', Phi'').
struct ExplicitGeodesic {
    double x0 = 0.0;
    double x_minus = 0.0;
    double x_plus = 0.0;
    StopReason left_stop = StopReason::ReachedEnd;
    StopReason right_stop = StopReason::ReachedEnd;

    CubicHermite curve;                 // nodes (x, Phi, Phi')
    std::function<Jet2(double)> exact;  // optional closed form

    double sample_lo() const { return curve.front(); }
    double sample_hi() const { return curve.back(); }
    bool unbounded_left() const { return left_stop == StopReason::SpanLimit; }
    bool unbounded_right() const { return right_stop == StopReason::SpanLimit; }

    Jet2 eval(double x) const;
    double phi(double x) const { return eval(x).v; }
};

// Second derivative of a geodesic in explicit form:
//   Phi'' = (3 Phi^2 + h)/(Phi^2 - h) * Phi'^2/Phi
//           - h' Phi'/(Phi^2 - h) + (Phi^4 - h^2)/Phi.
double explicit_rhs(const HFunction& h, double x, double phi, double phiprime);

struct ExplicitOptions {
    double rtol = 1e-12;
    double atol = 1e-12;
    double max_dx = 0.002;        // dense-node spacing cap
    double max_step = 0.02;       // integrator step cap; bounds the dense-output bias
    double max_halfwidth = 8.0;   // span cap on each side of x0
    double phi_max = 1e8;         // blow-up guard
    double dphi_max = 1e12;       // blow-up guard
    long max_steps = 2000000;
};

// Integrates the explicit-form equation both ways from x0 and brackets the
// maximal interval: the earliest of degeneracy, phi -> 0, blow-up (detected
// as step underflow), or the span cap on each side.
ExplicitGeodesic integrate_explicit(const HFunction& h, double x0, double phi0, double phiprime0,
                                    double tol = 1e-12, const ExplicitOptions& opts = {});

// Reparametrizes a trajectory by x on the maximal sub-span around s = 0 where
// xdot keeps one sign; Phi'(x) = phidot/xdot. Throws PreconditionError when
// xdot vanishes at the anchor.
ExplicitGeodesic explicit_from_parametric(const GeodesicTrajectory& traj,
                                          const HFunction& h, double max_dx = 0.002);

// Closed-form geodesics for the three constant-h worked cases.
struct ZeroGeodesic {
    double C1 = 2.0;  // Phi(x) = 1/sqrt(C1^2 - (x + C2)^2)
    double C2 = 0.0;
};
struct MinusOmega2Geodesic {
    double omega = 1.0;  // Phi = omega on all of R
};
struct PlusOmega2Geodesic {
    double omega = 1.0;  // Phi = omega sqrt( tan(omega(x - xbar)) / tan(omega(x - xbar - xtilde)) )
    double xbar = 0.0;
    double xtilde = 0.5;  // relative phase shift, 0 < xtilde < pi/(2 omega)
    int k = 0;            // domain index
};
using ClosedFormKind = std::variant<ZeroGeodesic, MinusOmega2Geodesic, PlusOmega2Geodesic>;

// Exact sampled closed form with exact interval endpoints. span_halfwidth
// bounds the sampled range for the unbounded constant solution.
ExplicitGeodesic closed_form_geodesic(const ClosedFormKind& kind, double max_dx = 0.002,
                                      double span_halfwidth = 10.0);

// Integral-form residual of the explicit-form equation over [a, b]:
// |Phi'(b) - Phi'(a) - int rhs(x, Phi, Phi') dx| / (1 + |Phi'(b) - Phi'(a)|).
// Uses only values and first derivatives of the dense curve, so it measures
// the equation at the accuracy of the integration rather than of the mesh
// (second derivatives of interpolated data carry a sqrt(curvature * tol)
// noise floor).
double integral_form_residual(const HFunction& h, const ExplicitGeodesic& geo, double a,
                              double b);

// Residual of the explicit-form equation for a curve known only through
// point values: Phi' and Phi'' come from five-point central differences over
// a small ladder of steps and the best-conditioned rung is reported. Scaled
// by 1 + |Phi''|. step_scale stretches the ladder for wide or narrow domains.
double explicit_form_residual(const HFunction& h, const std::function<double(double)>& phi_of_x,
                              double x, double step_scale = 1.0);

} // namespace hyperode

#endif
