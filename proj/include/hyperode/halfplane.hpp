#ifndef HYPERODE_HALFPLANE_HPP
#define HYPERODE_HALFPLANE_HPP

#include <vector>

#include "hyperode/solutions.hpp"

namespace hyperode {

// Point of the Poincare upper half plane H, metric (dX^2 + dY^2)/Y^2.
struct HalfPlanePoint {
    double X = 0.0;
    double Y = 1.0;
};

// Data of the chart M_h -> H built from a pair of independent solutions:
//   X = X0 +- W^-1 (Phi^2 u1 u2 + u1' u2') / (Phi^2 u1^2 + u1'^2)
//   Y = Phi / (Phi^2 u1^2 + u1'^2)
struct DiffeoSpec {
    DenseSolution u1, u2;
    double W = 1.0;   // u1' u2 - u1 u2'
    double X0 = 0.0;
    int sign = +1;    // the +- in X
};

// Spec whose (u1, u2) = (u_top, u_bot) of a solution pair; such a chart sends
// the pair's own geodesic to the vertical line X = X0.
DiffeoSpec spec_from_pair(const SolutionPair& pair, double X0 = 0.0, int sign = +1);

HalfPlanePoint to_halfplane(const DiffeoSpec& spec, const MhPoint& p);

struct Jacobian2 {
    double Xx = 0.0, Xphi = 0.0, Yx = 0.0, Yphi = 0.0;
    double det() const { return Xx * Yphi - Xphi * Yx; }
};

// Closed-form Jacobian of the chart (u'' eliminated through u'' = -h u).
Jacobian2 jacobian(const DiffeoSpec& spec, const HFunction& h, const MhPoint& p);

// Central-difference Jacobian of to_halfplane with one Richardson pass;
// oracle for the closed form. step <= 0 selects the default.
Jacobian2 fd_jacobian(const DiffeoSpec& spec, const MhPoint& p, double step = 0.0);

// Max componentwise |g_h - J^T g_H J| with Y replaced by Y(x, phi).
double pullback_error(const DiffeoSpec& spec, const HFunction& h, const MhPoint& p);

// Residual of ( Phi/(h - Phi^2) dY/dx )^2 + ( Phi dY/dphi )^2 = Y^2 with Y
// built from u = A u1 + B u2; scaled by Y^2.
double pde_residual(const DiffeoSpec& spec, const HFunction& h, const MhPoint& p, double A,
                    double B);

struct KillingCharges {
    double A1 = 0.0, A2 = 0.0, A3 = 0.0;
};

struct KillingChargesReport {
    KillingCharges charges;   // means along the trajectory
    double max_drift = 0.0;   // max |A_i(s) - mean_i| / (1 + |mean_i|)
    double relation_max = 0.0; // max residual of the charge/Phi^2 relation
    int relation_skipped = 0;  // samples with a vanishing denominator
};

// Pushes each trajectory sample through the chart and evaluates the three
// conserved quantities g_H(k_i, image velocity) for the Killing fields
// k1 = (X^2 - Y^2) dX + 2XY dY, k2 = X dX + Y dY, k3 = dX.
KillingChargesReport killing_charges(const DiffeoSpec& spec, const HFunction& h,
                                     const GeodesicTrajectory& traj);

// Least-squares circle with center constrained to the given axis
// (0: center (c, 0) on the X-axis, 1: center (0, c) on the Y-axis).
struct CircleFit {
    double center = 0.0;
    double radius = 0.0;
    double max_residual = 0.0;  // max | |p - c| - r |, absolute
};
CircleFit fit_circle_on_axis(const std::vector<HalfPlanePoint>& pts, int axis);

// Image of a geodesic under the chart, classified as a geodesic of H.
struct GeodesicImage {
    enum class Kind { VerticalLine, Semicircle, Unclassified };
    Kind kind = Kind::Unclassified;
    double X0 = 0.0;          // vertical line abscissa
    double center_x = 0.0;    // semicircle center (on the X-axis)
    double radius = 0.0;
    double fit_residual = 0.0;
    std::vector<HalfPlanePoint> samples;
};
GeodesicImage geodesic_image(const DiffeoSpec& spec, const ExplicitGeodesic& geo,
                             int n_samples = 200);

// Closed-form inverse of the chart for h = -omega^2 with the exponential
// pair, plus sign and X0 = 0:
//   x = -ln(2 omega sqrt(X^2 + Y^2)) / (2 omega),
//   phi = omega (X + sqrt(X^2 + Y^2)) / Y.
MhPoint minus_omega2_inverse(double omega, const HalfPlanePoint& q);

// Generic local inverse by damped Newton iteration with the closed-form
// Jacobian, starting from guess.
MhPoint invert_map(const DiffeoSpec& spec, const HFunction& h, const HalfPlanePoint& target,
                   MhPoint guess, double tol = 1e-13, int max_iter = 60);

} // namespace hyperode

#endif
