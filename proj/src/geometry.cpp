#include "hyperode/geometry.hpp"

#include <cmath>

namespace hyperode {

Jet2 require_nondegenerate(const HFunction& h, const MhPoint& p) {
    if (!(p.phi > 0.0)) throw EvalError("point has phi <= 0");
    const Jet2 hj = h.eval_jet(p.x);
    const double gap = hj.v - p.phi * p.phi;
    if (std::fabs(gap) < degeneracy_margin(hj.v, p.phi))
        throw DegeneracyError("point lies on the degeneracy locus phi^2 = h(x)");
    return hj;
}

MetricTensor2 metric(const HFunction& h, const MhPoint& p) {
    if (!(p.phi > 0.0)) throw EvalError("point has phi <= 0");
    const double hv = h.eval_jet(p.x).v;
    const double gap = hv - p.phi * p.phi;
    MetricTensor2 g;
    g.g_xx = gap * gap / (p.phi * p.phi);
    g.g_phiphi = 1.0 / (p.phi * p.phi);
    g.g_xphi = 0.0;
    return g;
}

ChristoffelSet christoffel(const HFunction& h, const MhPoint& p) {
    const Jet2 hj = require_nondegenerate(h, p);
    const double phi = p.phi;
    const double phi2 = phi * phi;
    const double gap = hj.v - phi2;  // h - phi^2
    ChristoffelSet c;
    c.x_xx = hj.d1 / gap;
    c.x_xphi = (phi2 + hj.v) / (phi * (phi2 - hj.v));
    c.phi_xx = (hj.v * hj.v - phi2 * phi2) / phi;
    c.phi_phiphi = -1.0 / phi;
    return c;
}

double sectional_curvature(const HFunction& h, const MhPoint& p) {
    const Jet2 hj = require_nondegenerate(h, p);
    const double phi2 = p.phi * p.phi;
    const double gap = hj.v - phi2;
    const double riemann_xpxp = -(gap * gap) / (phi2 * phi2);
    const double det_g = (gap * gap / phi2) * (1.0 / phi2);
    return riemann_xpxp / det_g;
}

MetricTensor2 ricci(const HFunction& h, const MhPoint& p) {
    require_nondegenerate(h, p);
    const MetricTensor2 g = metric(h, p);
    return {-g.g_xx, -g.g_phiphi, -g.g_xphi};
}

namespace {

// Gamma^i_{jk} = 1/2 g^{il} (g_{lj,k} + g_{lk,j} - g_{jk,l}) assembled from
// central differences of the (diagonal) metric at a single step.
ChristoffelSet fd_christoffel_step(const HFunction& h, const MhPoint& p, double step) {
    auto at = [&](double x, double phi) {
        if (!(phi > 0.0)) throw DegeneracyError("finite-difference stencil left phi > 0");
        const double hv = h.eval_jet(x).v;
        if (std::fabs(hv - phi * phi) < degeneracy_margin(hv, phi))
            throw DegeneracyError("degeneracy encountered inside the finite-difference stencil");
        return metric(h, MhPoint{x, phi});
    };

    const MetricTensor2 g0 = at(p.x, p.phi);
    const MetricTensor2 gxp = at(p.x + step, p.phi);
    const MetricTensor2 gxm = at(p.x - step, p.phi);
    const MetricTensor2 gpp = at(p.x, p.phi + step);
    const MetricTensor2 gpm = at(p.x, p.phi - step);

    const double dxx_dx = (gxp.g_xx - gxm.g_xx) / (2.0 * step);
    const double dxx_dphi = (gpp.g_xx - gpm.g_xx) / (2.0 * step);
    const double dpp_dphi = (gpp.g_phiphi - gpm.g_phiphi) / (2.0 * step);

    const double inv_gxx = 1.0 / g0.g_xx;
    const double inv_gpp = 1.0 / g0.g_phiphi;

    // g_{x phi} = 0 identically, so the general formula reduces to
    // differences of the two diagonal components.
    ChristoffelSet c;
    c.x_xx = 0.5 * inv_gxx * dxx_dx;
    c.x_xphi = 0.5 * inv_gxx * dxx_dphi;
    c.phi_xx = -0.5 * inv_gpp * dxx_dphi;
    c.phi_phiphi = 0.5 * inv_gpp * dpp_dphi;
    return c;
}

} // namespace

ChristoffelSet fd_christoffel(const HFunction& h, const MhPoint& p, double step) {
    require_nondegenerate(h, p);
    if (step <= 0.0) step = 1e-4 * (1.0 + std::fabs(p.x) + p.phi);
    const ChristoffelSet c1 = fd_christoffel_step(h, p, step);
    const ChristoffelSet c2 = fd_christoffel_step(h, p, 0.5 * step);
    // One Richardson pass on the O(step^2) central differences.
    auto rich = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };
    return {rich(c1.x_xx, c2.x_xx), rich(c1.x_xphi, c2.x_xphi), rich(c1.phi_xx, c2.phi_xx),
            rich(c1.phi_phiphi, c2.phi_phiphi)};
}

} // namespace hyperode
