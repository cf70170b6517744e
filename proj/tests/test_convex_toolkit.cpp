#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "warpcurv/convex_toolkit.hpp"
#include "warpcurv/error.hpp"

using namespace warpcurv;

namespace {

PiecewiseExpr kink(double left_slope, double right_slope) {
    return PiecewiseExpr({0.0}, {Expr::affine(left_slope, 0.0, 0.0),
                                 Expr::affine(right_slope, 0.0, 0.0)});
}

// Composite Simpson rule, kept independent of the library's Gauss-Legendre code.
template <class F>
double simpson(F f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::io;
}

}  // namespace

TEST(Bump, PlateauSupportAndMass) {
    EXPECT_EQ(bump(0.0).v, 1.0);
    EXPECT_EQ(bump(0.5).v, 1.0);
    EXPECT_EQ(bump(-0.5).v, 1.0);
    EXPECT_EQ(bump(1.0).v, 0.0);
    EXPECT_EQ(bump(-1.2).v, 0.0);
    for (double t = -1.0; t <= 1.0; t += 1e-3) EXPECT_GE(bump(t).v, 0.0);
    // Piecewise Simpson on the transition bands; the plateau contributes exactly 1.
    const double band = simpson([](double t) { return bump(t).v; }, 0.5, 1.0, 20000);
    EXPECT_NEAR(1.0 + 2.0 * band, bump_mass, 1e-13);
    const double delta = 3e-4;
    auto th = [&](double y) { return theta(y, delta); };
    const double mass = 2.0 * (simpson(th, 0.0, 0.5 * delta, 200) + simpson(th, 0.5 * delta, delta, 40000));
    EXPECT_NEAR(mass, 1.0, 1e-13);
}

TEST(Bump, DerivativesMatchDifferences) {
    const double h = 1e-6;
    for (double t : {-0.9, -0.7, -0.55, 0.6, 0.75, 0.95}) {
        const Jet j = bump(t);
        EXPECT_NEAR(j.d1, (bump(t + h).v - bump(t - h).v) / (2 * h), 1e-6 * (1 + std::abs(j.d1)));
        EXPECT_NEAR(j.d2, (bump(t + h).d1 - bump(t - h).d1) / (2 * h), 1e-5 * (1 + std::abs(j.d2)));
    }
}

TEST(Theta2, TableAgreesWithDirectQuadrature) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.2, 2.2);
    for (int i = 0; i < 2000; ++i) {
        const double w = u(rng);
        EXPECT_NEAR(theta2(w, 1.0), theta2_reference(w), 1e-13) << w;
    }
    // Scaling: (theta_d * theta_d)(w) = (theta_1 * theta_1)(w / d) / d.
    EXPECT_NEAR(theta2(0.3e-3, 1e-3), theta2_reference(0.3) * 1e3, 1e-9);
    EXPECT_EQ(theta2(2.0, 1.0), 0.0);
}

TEST(Theta2, UnitMassAndPeak) {
    const double mass = 2.0 * simpson([](double w) { return theta2(w, 1.0); }, 0.0, 2.0, 40000);
    EXPECT_NEAR(mass, 1.0, 1e-12);
    // Peak value is the L2 norm of theta_1.
    const double l2 = 2.0 * simpson([](double y) { return theta(y, 1.0) * theta(y, 1.0); }, 0.0,
                                    1.0, 40000);
    EXPECT_NEAR(theta2(0.0, 1.0), l2, 1e-12);
}

TEST(Mollify, AffineIsReproduced) {
    const PiecewiseExpr f(Expr::affine(2.5, 1.0, -3.0));
    for (int passes : {1, 2}) {
        for (double x : {-1.0, 0.0, 0.7, 12.0}) {
            const auto r = mollify_checked(f, {1e-3, 64}, passes, x);
            EXPECT_NEAR(r.value.v, -3.0 + 2.5 * (x - 1.0), 1e-13 * (1 + std::abs(x)));
            EXPECT_NEAR(r.value.d1, 2.5, 1e-13);
            EXPECT_NEAR(r.value.d2, 0.0, 1e-13);
        }
    }
}

TEST(Mollify, QuadraticPicksUpSecondMoment) {
    const double d = 0.01;
    const PiecewiseExpr f(Expr::quadratic(1.0, 0.0));
    const double m2 = 2.0 * simpson([&](double y) { return y * y * theta(y, d); }, 0.0, d, 40000);
    const double x = 0.3;
    EXPECT_NEAR(mollify(f, {d, 64}, 1, 0, x), x * x + m2, 1e-15);
    EXPECT_NEAR(mollify(f, {d, 64}, 2, 0, x), x * x + 2.0 * m2, 1e-15);
    EXPECT_NEAR(mollify(f, {d, 64}, 2, 1, x), 2.0 * x, 1e-14);
    EXPECT_NEAR(mollify(f, {d, 64}, 2, 2, x), 2.0, 1e-13);
}

TEST(Mollify, KinkSecondDerivative) {
    const PiecewiseExpr f = kink(1.0, 2.0);
    for (double d : {1e-2, 1e-3, 1e-6}) {
        const double at_kink = mollify(f, {d, 64}, 2, 2, 0.0);
        EXPECT_GE(at_kink, 1.0 / (2.0 * d));
        EXPECT_NEAR(at_kink * d, theta2_reference(0.0), 1e-12);
        EXPECT_EQ(mollify(f, {d, 64}, 2, 2, 3.0 * d), 0.0);
        EXPECT_NEAR(mollify(f, {d, 64}, 2, 0, 3.0 * d), 6.0 * d, 1e-15);
        const double once = mollify(f, {d, 64}, 1, 2, 0.0);
        EXPECT_NEAR(once * d, 1.0 / bump_mass, 1e-12);
    }
}

TEST(Mollify, ErrorEstimateIsSmall) {
    const PiecewiseExpr f({0.2}, {Expr::ln_sinh(1.0),
                                  Expr::affine(1.0 / std::tanh(0.2), 0.2, std::log(std::sinh(0.2)))});
    const auto r = mollify_checked(f, {1e-3, 64}, 2, 0.2003);
    EXPECT_LT(r.error_estimate.v, 1e-11 * (1 + std::abs(r.value.v)));
    EXPECT_LT(r.error_estimate.d1, 1e-11 * (1 + std::abs(r.value.d1)));
    EXPECT_LT(r.error_estimate.d2, 1e-11 * (1 + std::abs(r.value.d2)));
}

TEST(Mollify, DoublePassEqualsNestedSingle) {
    // Smooth piece with curvature plus a kink, so every derivative order is non-trivial.
    const PiecewiseExpr f({0.0}, {Expr::ln_cosh(3.0), Expr::ln_cosh(3.0) + Expr::affine(0.8, 0.0, 0.0)});
    const double d = 0.05;
    for (double x : {0.0, 0.03, -0.07, 0.11}) {
        for (int k : {0, 1, 2}) {
            // Once-mollified f is smooth, so one Simpson rule over the plateau and bands suffices.
            auto inner = [&](double y) { return mollify(f, {d, 64}, 1, k, x - y) * theta(y, d); };
            double nested = 0.0;
            const double edges[] = {-d, -0.5 * d, 0.5 * d, d};
            for (int i = 0; i < 3; ++i) nested += simpson(inner, edges[i], edges[i + 1], 4000);
            const double direct = mollify(f, {d, 64}, 2, k, x);
            EXPECT_NEAR(direct, nested, 1e-10 * (1 + std::abs(direct))) << "x=" << x << " k=" << k;
        }
    }
}

TEST(Mollify, Errors) {
    const PiecewiseExpr f = kink(1.0, 2.0);
    EXPECT_EQ(kind_of([&] { (void)mollify(f, {0.0, 64}, 1, 0, 0.0); }), ErrorKind::parameter);
    EXPECT_EQ(kind_of([&] { (void)mollify(f, {1e-3, 64}, 3, 0, 0.0); }), ErrorKind::parameter);
    EXPECT_EQ(kind_of([&] { (void)mollify(f, {1e-3, 64}, 1, 3, 0.0); }), ErrorKind::parameter);
    const PiecewiseExpr g(Expr::ln_sinh(1.0), 0.0, 5.0);
    EXPECT_EQ(kind_of([&] { (void)mollify(g, {0.1, 64}, 2, 0, 0.15); }), ErrorKind::domain);
}

TEST(Piecewise, ContinuityIsEnforced) {
    EXPECT_EQ(kind_of([] {
                  PiecewiseExpr({0.0}, {Expr::affine(1, 0, 0), Expr::affine(2, 0, 1e-6)});
              }),
              ErrorKind::continuity);
    EXPECT_EQ(kind_of([] { PiecewiseExpr({1.0, 0.0}, {Expr::affine(1, 0, 0), Expr::affine(1, 0, 0), Expr::affine(1, 0, 0)}); }),
              ErrorKind::parameter);
}

TEST(Piecewise, OneSidedEvaluation) {
    const PiecewiseExpr f = kink(1.0, 2.0);
    EXPECT_EQ(f.eval_left(0.0).d1, 1.0);
    EXPECT_EQ(f.eval(0.0).d1, 2.0);
}

TEST(Expr, DeltaMatchesDifferenceAwayFromCancellation) {
    const std::vector<Expr> cat{Expr::affine(0.3, 1, 2),       Expr::quadratic(2.0, 0.4),
                                Expr::ln_sinh(1.5),             Expr::ln_cosh(0.5),
                                Expr::ln_quadratic(2, 0.3, 0.1, 0.5), Expr::ln_tau_exp(1e-3),
                                Expr::exp(Expr::ln_cosh(0.5)),  Expr::scale(-2.0, Expr::ln_sinh(1.0))};
    for (const Expr& e : cat) {
        for (double r : {0.3, 1.1, 2.5}) {
            const double dr = 0.25;
            EXPECT_NEAR(e.delta(r, dr), e.eval(r + dr).v - e.eval(r).v, 1e-13);
            const double h = 1e-5;
            const Jet j = e.eval(r);
            EXPECT_NEAR(j.d1, (e.eval(r + h).v - e.eval(r - h).v) / (2 * h), 1e-7);
            EXPECT_NEAR(j.d2, (e.eval(r + h).d1 - e.eval(r - h).d1) / (2 * h), 1e-7);
        }
    }
}

TEST(Expr, LargeArgumentsStayFinite) {
    const Expr s = Expr::ln_sinh(1.0);
    EXPECT_NEAR(s.eval(800.0).v, 800.0 - std::log(2.0), 1e-12);
    const Expr c = Expr::ln_cosh(0.5);
    EXPECT_NEAR(c.eval(-1000.0).v, 500.0 - std::log(2.0), 1e-12);
    const Expr t = Expr::ln_tau_exp(1e-87);
    EXPECT_NEAR(t.eval(-400.0).v, std::log(1e-87) + std::log1p(std::exp(-200.0) / 1e-87), 1e-12);
    EXPECT_NEAR(t.eval(-400.0).d1, 0.5 / (1.0 + 1e-87 * std::exp(200.0)), 1e-15);
}

TEST(SmoothAt, EqualsBaseOutsideAndIsConvex) {
    const PiecewiseExpr f({0.0}, {Expr::quadratic(1.0, 0.0),
                                  Expr::quadratic(1.0, 0.0) + Expr::affine(1.0, 0.0, 0.0)});
    const double sigma = 0.1;
    const double d = 1e-4;
    const SmoothedFunction sf = smooth_at(f, 0.0, d, sigma);
    for (double x : {-0.2, 0.2, -0.1, 0.1, 0.5}) {
        const Jet a = sf.eval(x);
        const Jet b = f.eval(x);
        EXPECT_EQ(a.v, b.v);
        EXPECT_EQ(a.d1, b.d1);
        EXPECT_EQ(a.d2, b.d2);
    }
    // Both pieces have f'' = 2; the cutoff costs O((delta / sigma)^2).
    EXPECT_GT(min_second_derivative_margin(sf, 0, 2.0 - 1e-4, 1000), 0.0);
    // Plateau equals the double convolution.
    for (double x : {-0.04, 0.0, 0.02}) {
        EXPECT_NEAR(sf.eval(x).v, mollify(f, {d, 64}, 2, 0, x), 1e-15);
        EXPECT_NEAR(sf.eval(x).d2, mollify(f, {d, 64}, 2, 2, x), 1e-10);
    }
}

TEST(SmoothAt, IncreasingStaysIncreasing) {
    const PiecewiseExpr f = kink(0.001, 5.0);
    const SmoothedFunction sf = smooth_at(f, 0.0, 1e-4, 1e-2);
    for (int i = 0; i < 1000; ++i) {
        const double x = -1e-2 + 2e-2 * i / 999.0;
        EXPECT_GT(sf.eval(x).d1, 0.0);
    }
}

TEST(SmoothAt, AffineUnchanged) {
    const PiecewiseExpr f({0.0}, {Expr::affine(2, 0, 1), Expr::affine(2, 0, 1)});
    const SmoothedFunction sf = smooth_at(f, 0.0, 1e-3, 1e-2);
    for (int i = 0; i < 101; ++i) {
        const double x = -1e-2 + 2e-2 * i / 100.0;
        EXPECT_NEAR(sf.eval(x).v, 1 + 2 * x, 1e-15);
        EXPECT_NEAR(sf.eval(x).d1, 2.0, 1e-13);
        EXPECT_NEAR(sf.eval(x).d2, 0.0, 1e-9);
    }
}

TEST(SmoothAt, LocalCoordinatesAtLargeCenter) {
    // sigma far below the resolution of c itself in absolute terms.
    const double c = -433.8;
    const PiecewiseExpr f({c}, {Expr::affine(0.5, c, c / 2), Expr::affine(0.75, c, c / 2)});
    const SmoothedFunction sf = smooth_at(f, c, 1e-9, 1e-7);
    const double d2 = sf.eval(c).d2;
    EXPECT_NEAR(d2 * 1e-9, 0.25 * theta2_reference(0.0), 1e-9);
    EXPECT_GT(min_second_derivative_margin(sf, 0, 0.0, 1000), -1e-6);
}

TEST(SmoothAt, Errors) {
    EXPECT_EQ(kind_of([] { (void)smooth_at(kink(2.0, 1.0), 0.0, 1e-3, 1e-2); }),
              ErrorKind::convexity_violation);
    EXPECT_EQ(kind_of([] { (void)smooth_at(kink(1.0, 2.0), 0.0, 1e-2, 1e-2); }),
              ErrorKind::parameter);
    const PiecewiseExpr two({0.0, 0.05}, {Expr::affine(1, 0, 0), Expr::affine(2, 0, 0),
                                          Expr::affine(3, 0.05, 0.1)});
    EXPECT_EQ(kind_of([&] {
                  const auto a = smooth_at(two, 0.0, 1e-3, 0.02);
                  (void)smooth_at(a, 0.05, 1e-3, 0.04);
              }),
              ErrorKind::parameter);
    EXPECT_NO_THROW({
        const auto a = smooth_at(two, 0.0, 1e-3, 0.02);
        (void)smooth_at(a, 0.05, 1e-3, 0.02);
    });
}

TEST(Bend, KinkedAffineBecomesConvexWithExactEndpoints) {
    const Expr f1 = Expr::affine(1.0, 0.0, 0.0);
    const Expr f2 = Expr::affine(2.0, 0.0, 0.0);
    const SmoothedFunction b = bend_splice(f1, f2, -1.0, 0.0, 1.0, 0.04, 0.2, 0.0);
    EXPECT_EQ(b.eval(-1.0).v, -1.0);
    EXPECT_EQ(b.eval(-1.0).d1, 1.0);
    EXPECT_EQ(b.eval(1.0).v, 2.0);
    EXPECT_EQ(b.eval(1.0).d1, 2.0);
    for (int i = 0; i <= 1000; ++i) EXPECT_GT(b.eval(-1.0 + 2.0 * i / 1000).d2, 0.0);
}

TEST(Bend, AsymmetricSplicePoint) {
    const BendPieces p = bend_corrections(Expr::affine(1, 0, 0), Expr::affine(3, 0, 0), -1.0, 0.0, 3.0, 0.1);
    EXPECT_NEAR(p.f1.eval(0.0).v, p.f2.eval(0.0).v, 1e-15);
    EXPECT_NEAR(p.f2.eval(0.0).d2, 2 * 0.1 / 9.0, 1e-15);
}

TEST(Bend, StrongConvexityBound) {
    const Expr f1 = Expr::quadratic(1.0, 0.0);
    const Expr f2 = Expr::quadratic(1.0, 0.0) + Expr::affine(0.5, 0.0, 0.0);
    const SmoothedFunction b = bend_splice(f1, f2, -1.0, 0.0, 1.0, 0.01, 0.1, 1.0);
    EXPECT_GT(min_second_derivative_margin(b, 0, 1.0, 1000), 0.0);
}

TEST(Bend, Errors) {
    const Expr a = Expr::affine(1, 0, 0);
    EXPECT_EQ(kind_of([&] { (void)bend_splice(a, a, -1, 0, 1, 0.01, 0.1, 0); }), ErrorKind::slope_order);
    EXPECT_EQ(kind_of([&] { (void)bend_splice(a, Expr::affine(2, 0, 1e-3), -1, 0, 1, 0.01, 0.1, 0); }),
              ErrorKind::continuity);
    EXPECT_EQ(kind_of([&] { (void)bend_splice(a, Expr::affine(2, 0, 0), -1, 0, 1, 0.01, 0.1, 1.0); }),
              ErrorKind::construction);
}

TEST(SpliceConvexity, Cases) {
    EXPECT_TRUE(check_splice_convexity(PiecewiseExpr(Expr::affine(1, 0, 0)), PiecewiseExpr(Expr::affine(2, 0, 0)), 0.0));
    EXPECT_FALSE(check_splice_convexity(PiecewiseExpr(Expr::affine(2, 0, 0)), PiecewiseExpr(Expr::affine(1, 0, 0)), 0.0));
    // ln sinh followed by the tangent line at c, raised to slope coth(c) + 0.1.
    const double c = 0.4;
    const PiecewiseExpr f1(Expr::ln_sinh(1.0), 0.0, 10.0);
    const PiecewiseExpr f2(Expr::affine(1.0 / std::tanh(c) + 0.1, c, std::log(std::sinh(c))));
    EXPECT_TRUE(check_splice_convexity(f1, f2, c));
}

TEST(Probe, KinkDeviationsShrinkWithDelta) {
    const auto rows = c1_convergence_probe(kink(1.0, 2.0), 0.0, 0.1, {1e-2, 1e-3, 1e-4});
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) {
        EXPECT_TRUE(std::isfinite(r.sup_value));
        EXPECT_TRUE(std::isfinite(r.sup_slope));
        // |F - f| <= slope jump * (second moment reach) <= 2 delta.
        EXPECT_LE(r.sup_value, 2.0 * r.delta);
    }
    EXPECT_LT(rows.back().sup_value, rows.front().sup_value);
    EXPECT_LT(rows.back().sup_slope, rows.front().sup_slope);
    EXPECT_GT(rows[0].sup_value / rows[1].sup_value, 7.0);
    EXPECT_LT(rows[0].sup_value / rows[1].sup_value, 14.0);
    EXPECT_EQ(kind_of([] { (void)c1_convergence_probe(kink(1, 2), 0.0, 0.1, {0.05}); }), ErrorKind::parameter);
}

TEST(Probe, SmoothInputAtFloor) {
    const PiecewiseExpr f({0.0}, {Expr::affine(1, 0, 0), Expr::affine(1, 0, 0)});
    for (const auto& r : c1_convergence_probe(f, 0.0, 0.1, {1e-2, 1e-3})) {
        EXPECT_LT(r.sup_value, 1e-15);
        EXPECT_LT(r.sup_slope, 1e-13);
    }
}
