#ifndef HYPERODE_GEOMETRY_HPP
#define HYPERODE_GEOMETRY_HPP

#include "hyperode/expr.hpp"

namespace hyperode {

// Point (x, phi) on the manifold M_h: the upper half plane phi > 0 with the
// locus phi^2 = h(x) removed. The metric is
//     g_h = [ (h(x) - phi^2)^2 dx^2 + dphi^2 ] / phi^2.
struct MhPoint {
    double x = 0.0;
    double phi = 1.0;
};

// Symmetric 2x2 tensor in (x, phi) coordinates; the off-diagonal entry is
// stored once.
struct MetricTensor2 {
    double g_xx = 0.0;
    double g_phiphi = 0.0;
    double g_xphi = 0.0;
};

// The nonzero Christoffel symbols of g_h; all others vanish identically.
// x_xphi stands for both symmetric slots Gamma^x_{x phi} = Gamma^x_{phi x}.
struct ChristoffelSet {
    double x_xx = 0.0;      // Gamma^x_{xx}
    double x_xphi = 0.0;    // Gamma^x_{x phi}
    double phi_xx = 0.0;    // Gamma^phi_{xx}
    double phi_phiphi = 0.0; // Gamma^phi_{phi phi}
};

// Operative margin for "on M_h": a point is treated as degenerate when
// |h - phi^2| falls below this scale-aware threshold.
inline double degeneracy_margin(double h, double phi) {
    return 1e-9 * (1.0 + phi * phi + std::fabs(h));
}

// Throws DegeneracyError if p is within the margin of phi^2 = h(x), and
// EvalError if phi <= 0. Returns the jet of h at p.x for reuse.
Jet2 require_nondegenerate(const HFunction& h, const MhPoint& p);

MetricTensor2 metric(const HFunction& h, const MhPoint& p);

ChristoffelSet christoffel(const HFunction& h, const MhPoint& p);

// Sectional curvature from the single independent Riemann component,
// K = R_{x phi x phi} / det g. Identically -1 on M_h.
double sectional_curvature(const HFunction& h, const MhPoint& p);

// Ricci tensor; equals -g componentwise.
MetricTensor2 ricci(const HFunction& h, const MhPoint& p);

// Central-finite-difference Christoffel symbols from the metric, one
// Richardson refinement. Oracle for christoffel(); step <= 0 selects the
// default 1e-4 * (1 + |x| + phi).
ChristoffelSet fd_christoffel(const HFunction& h, const MhPoint& p, double step = 0.0);

} // namespace hyperode

#endif
