#include "hyperode/halfplane.hpp"

#include <algorithm>
#include <cmath>

namespace hyperode {

DiffeoSpec spec_from_pair(const SolutionPair& pair, double X0, int sign) {
    return DiffeoSpec{pair.dense_top(), pair.dense_bot(), pair.wronskian(), X0, sign};
}

HalfPlanePoint to_halfplane(const DiffeoSpec& spec, const MhPoint& p) {
    if (!(p.phi > 0.0)) throw EvalError("phi must be positive");
    const auto a = spec.u1(p.x);
    const auto b = spec.u2(p.x);
    const double phi2 = p.phi * p.phi;
    const double denom = phi2 * a[0] * a[0] + a[1] * a[1];
    const double num = phi2 * a[0] * b[0] + a[1] * b[1];
    return {spec.X0 + spec.sign * num / (spec.W * denom), p.phi / denom};
}

Jacobian2 jacobian(const DiffeoSpec& spec, const HFunction& h, const MhPoint& p) {
    const Jet2 hj = require_nondegenerate(h, p);
    const auto a = spec.u1(p.x);
    const double u = a[0], du = a[1];
    const double phi = p.phi, phi2 = phi * phi;
    const double q = phi2 - hj.v;  // phi^2 - h
    const double Y = phi / (phi2 * u * u + du * du);
    const double Y2 = Y * Y;
    const double s = static_cast<double>(spec.sign);
    Jacobian2 J;
    J.Xx = s * (Y2 / phi2) * q * (du * du - phi2 * u * u);
    J.Xphi = s * 2.0 * (Y2 / phi) * du * u;
    J.Yx = -2.0 * (Y2 / phi) * q * du * u;
    J.Yphi = (Y2 / phi2) * (du * du - phi2 * u * u);
    return J;
}

Jacobian2 fd_jacobian(const DiffeoSpec& spec, const MhPoint& p, double step) {
    if (step <= 0.0) step = 1e-5 * (1.0 + std::fabs(p.x) + p.phi);
    auto one = [&](double st) {
        const HalfPlanePoint xp = to_halfplane(spec, {p.x + st, p.phi});
        const HalfPlanePoint xm = to_halfplane(spec, {p.x - st, p.phi});
        const HalfPlanePoint pp = to_halfplane(spec, {p.x, p.phi + st});
        const HalfPlanePoint pm = to_halfplane(spec, {p.x, p.phi - st});
        Jacobian2 J;
        J.Xx = (xp.X - xm.X) / (2.0 * st);
        J.Xphi = (pp.X - pm.X) / (2.0 * st);
        J.Yx = (xp.Y - xm.Y) / (2.0 * st);
        J.Yphi = (pp.Y - pm.Y) / (2.0 * st);
        return J;
    };
    const Jacobian2 c = one(step), f = one(0.5 * step);
    auto rich = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };
    return {rich(c.Xx, f.Xx), rich(c.Xphi, f.Xphi), rich(c.Yx, f.Yx), rich(c.Yphi, f.Yphi)};
}

double pullback_error(const DiffeoSpec& spec, const HFunction& h, const MhPoint& p) {
    const Jacobian2 J = jacobian(spec, h, p);
    const double Y = to_halfplane(spec, p).Y;
    const double invY2 = 1.0 / (Y * Y);
    const MetricTensor2 g = metric(h, p);
    const double pb_xx = invY2 * (J.Xx * J.Xx + J.Yx * J.Yx);
    const double pb_pp = invY2 * (J.Xphi * J.Xphi + J.Yphi * J.Yphi);
    const double pb_xp = invY2 * (J.Xx * J.Xphi + J.Yx * J.Yphi);
    return std::max({std::fabs(pb_xx - g.g_xx), std::fabs(pb_pp - g.g_phiphi),
                     std::fabs(pb_xp - g.g_xphi)});
}

double pde_residual(const DiffeoSpec& spec, const HFunction& h, const MhPoint& p, double A,
                    double B) {
    const Jet2 hj = require_nondegenerate(h, p);
    const auto a = spec.u1(p.x);
    const auto b = spec.u2(p.x);
    const double u = A * a[0] + B * b[0];
    const double du = A * a[1] + B * b[1];
    const double phi = p.phi, phi2 = phi * phi;
    const double q = phi2 - hj.v;
    const double Y = phi / (phi2 * u * u + du * du);
    const double Y2 = Y * Y;
    const double dY_dx = -2.0 * (Y2 / phi) * q * du * u;
    const double dY_dphi = (Y2 / phi2) * (du * du - phi2 * u * u);
    const double lhs_x = phi / (hj.v - phi2) * dY_dx;
    const double lhs_phi = phi * dY_dphi;
    return std::fabs(lhs_x * lhs_x + lhs_phi * lhs_phi - Y2) / Y2;
}

KillingChargesReport killing_charges(const DiffeoSpec& spec, const HFunction& h,
                                     const GeodesicTrajectory& traj) {
    const std::size_t n = traj.states.size();
    std::vector<KillingCharges> per(n);
    std::vector<double> phis(n), u1s(n), du1s(n), u2s(n), du2s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const GeodesicState& st = traj.states[i];
        const MhPoint p{st.x, st.phi};
        const HalfPlanePoint q = to_halfplane(spec, p);
        const Jacobian2 J = jacobian(spec, h, p);
        const double Xdot = J.Xx * st.xdot + J.Xphi * st.phidot;
        const double Ydot = J.Yx * st.xdot + J.Yphi * st.phidot;
        const double invY2 = 1.0 / (q.Y * q.Y);
        per[i].A3 = Xdot * invY2;
        per[i].A2 = (q.X * Xdot + q.Y * Ydot) * invY2;
        per[i].A1 = ((q.X * q.X - q.Y * q.Y) * Xdot + 2.0 * q.X * q.Y * Ydot) * invY2;
        const auto a = spec.u1(st.x);
        const auto b = spec.u2(st.x);
        phis[i] = st.phi;
        u1s[i] = a[0];
        du1s[i] = a[1];
        u2s[i] = b[0];
        du2s[i] = b[1];
    }

    KillingChargesReport rep;
    for (const auto& c : per) {
        rep.charges.A1 += c.A1;
        rep.charges.A2 += c.A2;
        rep.charges.A3 += c.A3;
    }
    rep.charges.A1 /= static_cast<double>(n);
    rep.charges.A2 /= static_cast<double>(n);
    rep.charges.A3 /= static_cast<double>(n);
    for (const auto& c : per) {
        rep.max_drift = std::max(rep.max_drift,
                                 std::fabs(c.A1 - rep.charges.A1) / (1.0 + std::fabs(rep.charges.A1)));
        rep.max_drift = std::max(rep.max_drift,
                                 std::fabs(c.A2 - rep.charges.A2) / (1.0 + std::fabs(rep.charges.A2)));
        rep.max_drift = std::max(rep.max_drift,
                                 std::fabs(c.A3 - rep.charges.A3) / (1.0 + std::fabs(rep.charges.A3)));
    }

    // Relation between the charges and Phi^2 along the curve. Denominators
    // can vanish at isolated points; those samples are skipped and counted.
    const double W = spec.W;
    const KillingCharges& A = rep.charges;
    for (std::size_t i = 0; i < n; ++i) {
        const double num = A.A1 * W * W * du1s[i] * du1s[i] - 2.0 * A.A2 * W * du1s[i] * du2s[i] +
                           A.A3 * du2s[i] * du2s[i];
        const double den = A.A1 * W * W * u1s[i] * u1s[i] - 2.0 * A.A2 * W * u1s[i] * u2s[i] +
                           A.A3 * u2s[i] * u2s[i];
        const double scale = std::fabs(A.A1 * W * W * u1s[i] * u1s[i]) +
                             std::fabs(2.0 * A.A2 * W * u1s[i] * u2s[i]) +
                             std::fabs(A.A3 * u2s[i] * u2s[i]);
        if (std::fabs(den) < 1e-12 * scale) {
            ++rep.relation_skipped;
            continue;
        }
        const double resid = phis[i] * phis[i] + num / den;
        rep.relation_max = std::max(rep.relation_max, std::fabs(resid) / (1.0 + phis[i] * phis[i]));
    }
    return rep;
}

CircleFit fit_circle_on_axis(const std::vector<HalfPlanePoint>& pts, int axis) {
    if (pts.size() < 3) throw PreconditionError("circle fit needs at least 3 points");
    // |p|^2 = 2 c a + (r^2 - c^2) with a the coordinate along the axis:
    // linear least squares in (2c, r^2 - c^2).
    double s_aa = 0.0, s_a = 0.0, s_ar = 0.0, s_r = 0.0;
    const double m = static_cast<double>(pts.size());
    for (const auto& p : pts) {
        const double a = axis == 0 ? p.X : p.Y;
        const double rr = p.X * p.X + p.Y * p.Y;
        s_aa += a * a;
        s_a += a;
        s_ar += a * rr;
        s_r += rr;
    }
    const double det = s_aa * m - s_a * s_a;
    if (std::fabs(det) < 1e-300) throw NumericError("degenerate circle fit");
    const double alpha = (s_ar * m - s_a * s_r) / det;   // 2c
    const double beta = (s_aa * s_r - s_a * s_ar) / det; // r^2 - c^2
    CircleFit fit;
    fit.center = 0.5 * alpha;
    const double r2 = beta + fit.center * fit.center;
    if (!(r2 > 0.0)) throw NumericError("circle fit collapsed");
    fit.radius = std::sqrt(r2);
    for (const auto& p : pts) {
        const double dx = axis == 0 ? p.X - fit.center : p.X;
        const double dy = axis == 0 ? p.Y : p.Y - fit.center;
        fit.max_residual = std::max(fit.max_residual, std::fabs(std::hypot(dx, dy) - fit.radius));
    }
    return fit;
}

GeodesicImage geodesic_image(const DiffeoSpec& spec, const ExplicitGeodesic& geo, int n_samples) {
    if (n_samples < 5) throw PreconditionError("need at least 5 samples");
    GeodesicImage img;
    const double lo = std::max(geo.sample_lo(), spec.u1.x_lo);
    const double hi = std::min(geo.sample_hi(), spec.u1.x_hi);
    if (!(lo < hi)) throw PreconditionError("geodesic and chart domains do not overlap");
    const double margin = 0.01 * (hi - lo);
    for (int i = 0; i < n_samples; ++i) {
        const double x = lo + margin + (hi - lo - 2.0 * margin) * static_cast<double>(i) / (n_samples - 1);
        const Jet2 p = geo.eval(x);
        img.samples.push_back(to_halfplane(spec, {x, p.v}));
    }

    double mean_x = 0.0;
    for (const auto& p : img.samples) mean_x += p.X;
    mean_x /= static_cast<double>(img.samples.size());
    double max_dev = 0.0;
    for (const auto& p : img.samples) max_dev = std::max(max_dev, std::fabs(p.X - mean_x));
    if (max_dev <= 1e-6 * (1.0 + std::fabs(mean_x))) {
        img.kind = GeodesicImage::Kind::VerticalLine;
        img.X0 = mean_x;
        img.fit_residual = max_dev;
        return img;
    }

    const CircleFit fit = fit_circle_on_axis(img.samples, 0);
    img.center_x = fit.center;
    img.radius = fit.radius;
    img.fit_residual = fit.max_residual;
    img.kind = fit.max_residual <= 1e-4 * fit.radius ? GeodesicImage::Kind::Semicircle
                                                     : GeodesicImage::Kind::Unclassified;
    return img;
}

MhPoint minus_omega2_inverse(double omega, const HalfPlanePoint& q) {
    if (!(q.Y > 0.0)) throw EvalError("inverse requires Y > 0");
    const double r = std::hypot(q.X, q.Y);
    return {-std::log(2.0 * omega * r) / (2.0 * omega), omega * (q.X + r) / q.Y};
}

MhPoint invert_map(const DiffeoSpec& spec, const HFunction& h, const HalfPlanePoint& target,
                   MhPoint guess, double tol, int max_iter) {
    MhPoint p = guess;
    auto residual = [&](const MhPoint& pt) {
        const HalfPlanePoint q = to_halfplane(spec, pt);
        return std::array<double, 2>{q.X - target.X, q.Y - target.Y};
    };
    auto norm = [](const std::array<double, 2>& r) { return std::hypot(r[0], r[1]); };
    std::array<double, 2> r = residual(p);
    for (int it = 0; it < max_iter; ++it) {
        if (norm(r) <= tol * (1.0 + std::fabs(target.X) + target.Y)) return p;
        const Jacobian2 J = jacobian(spec, h, p);
        const double det = J.det();
        if (std::fabs(det) < 1e-300) throw NumericError("inverse Newton hit a singular Jacobian");
        const double dx = (J.Yphi * r[0] - J.Xphi * r[1]) / det;
        const double dphi = (-J.Yx * r[0] + J.Xx * r[1]) / det;
        double damp = 1.0;
        for (int k = 0; k < 40; ++k) {
            MhPoint trial{p.x - damp * dx, p.phi - damp * dphi};
            if (trial.phi > 0.0) {
                try {
                    const auto rt = residual(trial);
                    if (norm(rt) < norm(r)) {
                        p = trial;
                        r = rt;
                        break;
                    }
                } catch (const std::runtime_error&) {
                    // fall through to smaller step
                }
            }
            damp *= 0.5;
            if (k == 39) throw NumericError("inverse Newton stalled");
        }
    }
    if (norm(r) <= tol * 1e3 * (1.0 + std::fabs(target.X) + target.Y)) return p;
    throw NumericError("inverse Newton did not converge");
}

} // namespace hyperode
