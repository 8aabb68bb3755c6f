#include "doctest.h"

#include <cmath>

#include "hyperode/halfplane.hpp"
#include "support.hpp"

using namespace hyperode;

namespace {

// Analytic exponential pair for h = -omega^2.
DiffeoSpec exponential_spec(double w, double X0 = 0.0, int sign = +1) {
    DenseSolution up = testing::analytic_solution(-6.0, 6.0, [w](double x) {
        return std::array<double, 2>{std::exp(w * x), w * std::exp(w * x)};
    });
    DenseSolution dn = testing::analytic_solution(-6.0, 6.0, [w](double x) {
        return std::array<double, 2>{std::exp(-w * x), -w * std::exp(-w * x)};
    });
    return DiffeoSpec{std::move(up), std::move(dn), 2.0 * w, X0, sign};
}

// Analytic oscillator pair for h = +omega^2 (no relative shift).
DiffeoSpec oscillator_spec(double w, double xbar) {
    DenseSolution u1 = testing::analytic_solution(-9.0, 9.0, [=](double x) {
        return std::array<double, 2>{std::cos(w * (x - xbar)), -w * std::sin(w * (x - xbar))};
    });
    DenseSolution u2 = testing::analytic_solution(-9.0, 9.0, [=](double x) {
        return std::array<double, 2>{std::sin(w * (x - xbar)), w * std::cos(w * (x - xbar))};
    });
    return DiffeoSpec{std::move(u1), std::move(u2), -w, 0.0, +1};
}

} // namespace

TEST_CASE("chart values for the exponential pair match the closed form") {
    const double w = 0.8;
    const DiffeoSpec spec = exponential_spec(w);
    // at (0, omega) the numerator vanishes: (X, Y) = (0, 1/(2 omega))
    const HalfPlanePoint q0 = to_halfplane(spec, {0.0, w});
    CHECK(q0.X == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(q0.Y == doctest::Approx(1.0 / (2.0 * w)).epsilon(1e-14));

    Rng rng(21);
    for (int i = 0; i < 60; ++i) {
        const double x = rng.uniform(-2.0, 2.0);
        const double phi = rng.uniform(0.2, 3.0);
        const HalfPlanePoint q = to_halfplane(spec, {x, phi});
        const double e = std::exp(-2.0 * w * x);
        const double X_exact = e / (2.0 * w) * (phi * phi - w * w) / (phi * phi + w * w);
        const double Y_exact = phi * e / (phi * phi + w * w);
        CHECK(q.X == doctest::Approx(X_exact).epsilon(1e-12));
        CHECK(q.Y == doctest::Approx(Y_exact).epsilon(1e-12));
        CHECK(q.Y > 0.0);

        // round trip through the closed-form inverse
        const MhPoint back = minus_omega2_inverse(w, q);
        CHECK(back.x == doctest::Approx(x).epsilon(1e-12));
        CHECK(back.phi == doctest::Approx(phi).epsilon(1e-12));
    }
}

TEST_CASE("Jacobian: closed form vs finite differences, orthogonality, determinant sign") {
    Rng rng(22);
    const double w = 1.1;
    const HFunction h = HFunction::from_text("-omega^2", {{"omega", w}});
    const DiffeoSpec spec = exponential_spec(w);
    for (int i = 0; i < 40; ++i) {
        const MhPoint p{rng.uniform(-2.0, 2.0), rng.uniform(0.3, 2.5)};
        const Jacobian2 J = jacobian(spec, h, p);
        const Jacobian2 F = fd_jacobian(spec, p);
        auto rel = [](double a, double b) { return std::fabs(a - b) / (1.0 + std::fabs(a)); };
        CHECK(rel(J.Xx, F.Xx) <= 1e-6);
        CHECK(rel(J.Xphi, F.Xphi) <= 1e-6);
        CHECK(rel(J.Yx, F.Yx) <= 1e-6);
        CHECK(rel(J.Yphi, F.Yphi) <= 1e-6);
        // column orthogonality
        const double dot = J.Xx * J.Xphi + J.Yx * J.Yphi;
        const double scale = std::fabs(J.Xx * J.Xphi) + std::fabs(J.Yx * J.Yphi) + 1e-300;
        CHECK(std::fabs(dot) / scale <= 1e-12);
        // determinant sign = chart sign times sign(phi^2 - h)
        const double gap = p.phi * p.phi - h.eval_jet(p.x).v;
        CHECK(J.det() * spec.sign * gap > 0.0);
    }
}

TEST_CASE("determinant tends to zero toward the degeneracy locus") {
    const HFunction h = HFunction::from_text("1");
    const DiffeoSpec spec = oscillator_spec(1.0, 0.0);
    double prev = 1e300;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
        const MhPoint p{0.3, std::sqrt(1.0 + eps)};
        const double d = std::fabs(jacobian(spec, h, p).det());
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev <= 2e-5);
}

TEST_CASE("pullback identity for closed-form and numeric charts") {
    const double w = 1.3;
    const HFunction minus = HFunction::from_text("-omega^2", {{"omega", w}});
    const DiffeoSpec spec = exponential_spec(w);
    Rng rng(23);
    for (int i = 0; i < 50; ++i) {
        const MhPoint p{rng.uniform(-1.5, 1.5), rng.uniform(0.3, 2.5)};
        CHECK(pullback_error(spec, minus, p) <= 1e-10);
    }

    // the trivial chart: u1 = 1, u2 = x, W = -1, minus sign -> X = x, Y = 1/phi
    const HFunction zero = HFunction::from_text("0");
    DiffeoSpec triv{testing::analytic_solution(-5.0, 5.0,
                                               [](double) {
                                                   return std::array<double, 2>{1.0, 0.0};
                                               }),
                    testing::analytic_solution(-5.0, 5.0,
                                               [](double x) {
                                                   return std::array<double, 2>{x, 1.0};
                                               }),
                    -1.0, 0.0, -1};
    for (int i = 0; i < 30; ++i) {
        const MhPoint p{rng.uniform(-4.0, 4.0), rng.uniform(0.2, 4.0)};
        const HalfPlanePoint q = to_halfplane(triv, p);
        CHECK(q.X == doctest::Approx(p.x).epsilon(1e-14));
        CHECK(q.Y == doctest::Approx(1.0 / p.phi).epsilon(1e-14));
        CHECK(pullback_error(triv, zero, p) <= 1e-12);
    }

    // numeric pair from the direct oracle under a random h
    const HFunction h = HFunction::from_text("sin(x)+0.4");
    const DenseSolution u1 = direct_solve(h, 0.0, 1.0, 0.7, {-2.0, 2.0}, 1e-12);
    const DenseSolution u2 = direct_solve(h, 0.0, 1.0, -0.5, {-2.0, 2.0}, 1e-12);
    const double W = u1.du(0.0) * u2.u(0.0) - u1.u(0.0) * u2.du(0.0);
    const DiffeoSpec num{u1, u2, W, 0.0, +1};
    for (int i = 0; i < 40; ++i) {
        const MhPoint p = testing::random_nondegenerate_point(h, rng, -1.8, 1.8, 0.3, 2.5);
        CHECK(pullback_error(num, h, p) <= 1e-7);
    }
}

TEST_CASE("pullback is independent of the chart sign and offset") {
    const double w = 0.9;
    const HFunction minus = HFunction::from_text("-omega^2", {{"omega", w}});
    Rng rng(24);
    for (int i = 0; i < 20; ++i) {
        const MhPoint p{rng.uniform(-1.0, 1.0), rng.uniform(0.4, 2.0)};
        const double e_pp = pullback_error(exponential_spec(w, 0.0, +1), minus, p);
        const double e_mm = pullback_error(exponential_spec(w, 3.7, -1), minus, p);
        CHECK(std::fabs(e_pp - e_mm) <= 1e-15);
    }
}

TEST_CASE("the eikonal equation holds for Y of any combination") {
    Rng rng(25);
    const double w = 1.0;
    const HFunction minus = HFunction::from_text("-omega^2", {{"omega", w}});
    const DiffeoSpec spec = exponential_spec(w);
    for (int i = 0; i < 30; ++i) {
        const MhPoint p{rng.uniform(-1.5, 1.5), rng.uniform(0.3, 2.5)};
        CHECK(pde_residual(spec, minus, p, 1.0, 0.0) <= 1e-12);
        const double A = rng.uniform(-2.0, 2.0);
        const double B = rng.uniform(-2.0, 2.0);
        if (std::fabs(A) + std::fabs(B) < 0.1) continue;
        CHECK(pde_residual(spec, minus, p, A, B) <= 1e-12);
    }

    const HFunction zero = HFunction::from_text("0");
    const ExplicitGeodesic geo = closed_form_geodesic(ZeroGeodesic{2.0, 0.0});
    const SolutionPair pair = build_solution_pair(zero, geo, 0.0);
    const DiffeoSpec zspec = spec_from_pair(pair);
    for (int i = 0; i < 20; ++i) {
        const MhPoint p{rng.uniform(-1.5, 1.5), rng.uniform(0.3, 2.5)};
        const double A = rng.uniform(-2.0, 2.0), B = rng.uniform(-2.0, 2.0);
        if (std::fabs(A) + std::fabs(B) < 0.1) continue;
        CHECK(pde_residual(zspec, zero, p, A, B) <= 1e-12);
    }

    const HFunction h = HFunction::from_text("cos(x)-0.7");
    const DenseSolution u1 = direct_solve(h, 0.0, 1.0, 0.6, {-2.0, 2.0}, 1e-12);
    const DenseSolution u2 = direct_solve(h, 0.0, 1.0, -0.8, {-2.0, 2.0}, 1e-12);
    const double W = u1.du(0.0) * u2.u(0.0) - u1.u(0.0) * u2.du(0.0);
    const DiffeoSpec num{u1, u2, W, 0.0, +1};
    for (int i = 0; i < 20; ++i) {
        const MhPoint p = testing::random_nondegenerate_point(h, rng, -1.8, 1.8, 0.3, 2.5);
        CHECK(pde_residual(num, h, p, 0.8, -0.4) <= 1e-7);
    }
}

TEST_CASE("a geodesic maps to a vertical line through its own pair") {
    const HFunction h = HFunction::from_text("sin(x)+2");
    const ExplicitGeodesic geo = integrate_explicit(h, 0.0, 2.2, 0.3);
    const SolutionPair pair = build_solution_pair(h, geo, 0.0);
    const DiffeoSpec spec = spec_from_pair(pair, 1.5, +1);
    const GeodesicImage img = geodesic_image(spec, geo, 101);
    CHECK(img.kind == GeodesicImage::Kind::VerticalLine);
    CHECK(img.X0 == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(img.fit_residual <= 1e-8);
}

TEST_CASE("fixed-phi sweeps under the oscillator chart land on the closed-form circle") {
    const double w = 1.0, xbar = 0.0;
    const DiffeoSpec spec = oscillator_spec(w, xbar);
    for (double phi : {0.5, 0.25, 2.0}) {
        std::vector<HalfPlanePoint> pts;
        const double lo = xbar + 0.01, hi = xbar + M_PI / (2.0 * w) - 0.01;
        for (double x = lo; x <= hi; x += (hi - lo) / 80.0) {
            const HalfPlanePoint q = to_halfplane(spec, {x, phi});
            if (phi < w)
                CHECK(q.X > 0.0);  // right semicircle for phi < omega
            else
                CHECK(q.X < 0.0);
            pts.push_back(q);
        }
        const CircleFit fit = fit_circle_on_axis(pts, 1);
        const double c_exact = (phi * phi + w * w) / (2.0 * phi * w * w);
        const double r_exact = std::fabs(phi * phi - w * w) / (2.0 * phi * w * w);
        CHECK(std::fabs(fit.center - c_exact) <= 1e-8);
        CHECK(std::fabs(fit.radius - r_exact) <= 1e-8);
        CHECK(fit.max_residual <= 1e-8);
    }
}

TEST_CASE("generic charts send geodesics to verticals or X-centered semicircles") {
    const double w = 1.0;
    const HFunction minus = HFunction::from_text("-omega^2", {{"omega", w}});
    const ExplicitGeodesic geo = closed_form_geodesic(MinusOmega2Geodesic{w}, 0.002, 3.0);
    const DiffeoSpec spec = exponential_spec(w);
    // the constant geodesic through the exponential chart: X = 0 vertical
    const GeodesicImage img = geodesic_image(spec, geo, 101);
    CHECK(img.kind == GeodesicImage::Kind::VerticalLine);
    CHECK(img.X0 == doctest::Approx(0.0).epsilon(1e-12));

    // a different geodesic through the same chart: an X-centered semicircle
    const ExplicitGeodesic other = integrate_explicit(minus, 0.0, 0.6, 0.45);
    const GeodesicImage img2 = geodesic_image(spec, other, 101);
    CHECK(img2.kind == GeodesicImage::Kind::Semicircle);
    CHECK(img2.fit_residual <= 1e-6 * img2.radius);
}

TEST_CASE("images of geodesics stay geodesics under GL(2) recombination") {
    Rng rng(26);
    const HFunction h = HFunction::from_text("sin(x)+2");
    const ExplicitGeodesic geo = integrate_explicit(h, 0.0, 2.2, 0.0);
    const SolutionPair pair = build_solution_pair(h, geo, 0.0);
    for (int i = 0; i < 6; ++i) {
        const double A = rng.uniform(-1.5, 1.5), B = rng.uniform(-1.5, 1.5);
        const double C = rng.uniform(-1.5, 1.5), D = rng.uniform(-1.5, 1.5);
        if (std::fabs(A * D - B * C) < 0.2) continue;
        const DenseSolution v1 = general_solution(pair, A, B);
        const DenseSolution v2 = general_solution(pair, C, D);
        const DiffeoSpec spec{v1, v2, (A * D - B * C) * pair.wronskian(), 0.0, +1};
        const GeodesicImage img = geodesic_image(spec, geo, 101);
        CHECK(img.kind != GeodesicImage::Kind::Unclassified);
        if (img.kind == GeodesicImage::Kind::Semicircle)
            CHECK(img.fit_residual <= 1e-6 * img.radius);
        else
            CHECK(img.fit_residual <= 1e-6 * (1.0 + std::fabs(img.X0)));
    }
}

TEST_CASE("GL(2) recombinations keep solving the geodesic equation where admissible") {
    Rng rng(27);
    const HFunction h = HFunction::from_text("cos(x)+1.8");
    const ExplicitGeodesic geo = integrate_explicit(h, 0.0, 2.0, 0.2);
    const SolutionPair pair = build_solution_pair(h, geo, 0.0);
    int done = 0;
    while (done < 4) {
        const double A = rng.uniform(0.2, 1.5), B = -rng.uniform(0.2, 1.5);
        const double C = rng.uniform(0.2, 1.5), D = rng.uniform(0.2, 1.5);
        const DenseSolution v1 = general_solution(pair, A, B);
        const DenseSolution v2 = general_solution(pair, C, D);
        try {
            // route check: Phi from the recombined pair against an
            // independent integration of the explicit-form equation from
            // matched data at the interval midpoint
            const ReconstructionReport rep = verify_reconstruction(h, v1, v2, 0.0);
            const double w = rep.hi - rep.lo;
            const double mid = 0.5 * (rep.lo + rep.hi);
            const double phi_mid = phi_from_pair(v1, v2, mid);
            const double sigma = v1.du(mid) / v1.u(mid) + v2.du(mid) / v2.u(mid);
            const double dphi_mid =
                sigma * (h.eval_jet(mid).v - phi_mid * phi_mid) / (2.0 * phi_mid);
            ExplicitOptions opts;
            opts.max_halfwidth = w;
            const ExplicitGeodesic ref = integrate_explicit(h, mid, phi_mid, dphi_mid, 1e-11, opts);
            const double lo = std::max(rep.lo + 0.1 * w, ref.sample_lo());
            const double hi = std::min(rep.hi - 0.1 * w, ref.sample_hi());
            for (double x = lo; x <= hi; x += (hi - lo) / 24.0) {
                const double got = phi_from_pair(v1, v2, x);
                CHECK(std::fabs(got - ref.eval(x).v) <= 1e-6 * (1.0 + got));
            }
            ++done;
        } catch (const PreconditionError&) {
            continue;
        }
    }
}

TEST_CASE("Killing charges: vertical-image geodesic has A1 = A3 = 0, A2 nonzero") {
    const double w = 1.0;
    const HFunction minus = HFunction::from_text("-omega^2", {{"omega", w}});
    const GeodesicTrajectory traj = integrate_geodesic(minus, {0.0, w, 0.5, 0.0}, {0.0, 3.0});
    const ExplicitGeodesic geo = closed_form_geodesic(MinusOmega2Geodesic{w}, 0.002, 4.0);
    const SolutionPair pair = build_solution_pair(minus, geo, 0.0);
    const DiffeoSpec spec = spec_from_pair(pair);
    const KillingChargesReport rep = killing_charges(spec, minus, traj);
    CHECK(std::fabs(rep.charges.A1) <= 1e-9);
    CHECK(std::fabs(rep.charges.A3) <= 1e-9);
    CHECK(std::fabs(rep.charges.A2) > 0.1);
    CHECK(rep.max_drift <= 1e-8);
    CHECK(rep.relation_max <= 1e-6);
}

TEST_CASE("Killing charges are conserved and satisfy the charge relation generically") {
    Rng rng(28);
    const double w = 1.0;
    const HFunction minus = HFunction::from_text("-omega^2", {{"omega", w}});
    const DiffeoSpec spec = exponential_spec(w);
    for (int i = 0; i < 5; ++i) {
        const GeodesicState init{rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0),
                                 rng.uniform(0.2, 0.7), rng.uniform(-0.5, 0.5)};
        const GeodesicTrajectory traj = integrate_geodesic(minus, init, {0.0, 3.0});
        const KillingChargesReport rep = killing_charges(spec, minus, traj);
        CHECK(rep.max_drift <= 1e-8);
        CHECK(rep.relation_max <= 1e-6);
    }
}

TEST_CASE("generic Newton inversion recovers chart preimages") {
    const double w = 1.2;
    const HFunction minus = HFunction::from_text("-omega^2", {{"omega", w}});
    const DiffeoSpec spec = exponential_spec(w);
    Rng rng(29);
    for (int i = 0; i < 25; ++i) {
        const MhPoint p{rng.uniform(-1.0, 1.0), rng.uniform(0.4, 2.0)};
        const HalfPlanePoint target = to_halfplane(spec, p);
        const MhPoint guess{p.x + rng.uniform(-0.2, 0.2), p.phi * rng.uniform(0.8, 1.25)};
        const MhPoint back = invert_map(spec, minus, target, guess);
        CHECK(back.x == doctest::Approx(p.x).epsilon(1e-10));
        CHECK(back.phi == doctest::Approx(p.phi).epsilon(1e-10));
    }
}
