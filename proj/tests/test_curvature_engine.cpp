#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "warpcurv/curvature_engine.hpp"
#include "warpcurv/error.hpp"

using namespace warpcurv;

namespace {

// Sup oracle, parameterized by D first: for D = (cos f, sin f) on (Y_1, Y_2), the
// orthogonal C splits into the Y_1/Y_2 direction (value k21) and the (d_r, Y_3)
// block, a 2x2 quadratic form. The non-generic family adds max(kr1, kr2, k21).
double lam(const CoordinateCurvatures& cc, double f) {
    const double d1 = std::cos(f);
    const double d2 = std::sin(f);
    const double a = d1 * d1 * cc.kr1 + d2 * d2 * cc.kr2;   // c0^2
    const double b = d1 * d1 * cc.k21 + d2 * d2 * cc.k32;   // c3^2
    const double s = 1.5 * d1 * d2 * cc.mixed;              // c0 c3
    return 0.5 * (a + b) + std::sqrt(0.25 * (a - b) * (a - b) + s * s);
}

double sup_oracle(const CoordinateCurvatures& cc) {
    const int n = 20000;
    const double pi = std::numbers::pi;
    int ib = 0;
    double vb = -1e300;
    for (int i = 0; i < n; ++i) {
        const double v = lam(cc, pi * i / n);
        if (v > vb) {
            vb = v;
            ib = i;
        }
    }
    // Ternary refinement on the bracket.
    double lo = pi * (ib - 1) / n;
    double hi = pi * (ib + 1) / n;
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        (lam(cc, m1) < lam(cc, m2) ? lo : hi) = (lam(cc, m1) < lam(cc, m2) ? m1 : m2);
    }
    vb = std::max(vb, lam(cc, 0.5 * (lo + hi)));
    return std::max({vb, cc.k21, cc.kr1, cc.kr2});
}

WarpState random_state(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.2, 3.0);
    std::uniform_real_distribution<double> s(-2.0, 2.0);
    WarpState ws;
    ws.r = s(gen);
    ws.v = u(gen);
    ws.v1 = s(gen);
    ws.v2 = s(gen);
    ws.h = u(gen);
    ws.h1 = s(gen);
    ws.h2 = s(gen);
    return ws;
}

std::array<double, 4> embed_d(const PlanePair& pp) {
    if (pp.kind == PlaneKind::generic) return {0.0, pp.D[0], pp.D[1], 0.0};
    return {pp.D[0], pp.D[1], 0.0, 0.0};
}

}  // namespace

TEST(CoordinateCurvatures, ComplexHyperbolicValues) {
    const WarpState ws = WarpState::complex_hyperbolic(1.0);
    for (double c : {-0.5, -0.2, 0.0, 0.3, 0.5}) {
        EXPECT_NEAR(coordinate_curvatures(ws, c).k21, -0.25, 1e-14);
    }
    const CoordinateCurvatures cc = coordinate_curvatures(ws, 0.5);
    EXPECT_NEAR(cc.k32, -1.0, 1e-14);
    EXPECT_NEAR(cc.mixed, -0.5, 1e-14);
    EXPECT_NEAR(cc.kr1, -1.0, 1e-14);
    EXPECT_NEAR(cc.kr2, -0.25, 1e-14);
    EXPECT_NEAR(coordinate_curvatures(ws, 0.0).k32, -0.25, 1e-14);
}

TEST(CoordinateCurvatures, TailState) {
    const double eps = 0.1;
    for (double r : {-5.0, -1.0, 0.0, 2.0}) {
        const double ev = eps * std::exp(r);
        const double eh = std::exp(0.5 * r);
        const WarpState ws{r, ev, ev, ev, eh, 0.5 * eh, 0.25 * eh};
        const CoordinateCurvatures cc = coordinate_curvatures(ws, 0.37);
        EXPECT_NEAR(cc.k21, -0.499375, 1e-14);
        EXPECT_NEAR(cc.kr1, -1.0, 1e-15);
        EXPECT_NEAR(cc.kr2, -0.25, 1e-15);
    }
}

TEST(CoordinateCurvatures, Preconditions) {
    WarpState ws = WarpState::complex_hyperbolic(1.0);
    EXPECT_THROW((void)coordinate_curvatures(ws, 0.6), Error);
    ws.h = 0.0;
    EXPECT_THROW((void)coordinate_curvatures(ws, 0.0), Error);
}

TEST(Sectional, CoefficientsSumToOne) {
    CoordinateCurvatures cc{0.0, -0.25, -0.25, -0.25, -0.25, 0.0};
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 1000; ++i) {
        EXPECT_NEAR(sectional_curvature(cc, make_plane_pair({nd(gen), nd(gen), nd(gen), nd(gen)})), -0.25, 1e-15);
        EXPECT_NEAR(sectional_curvature(cc, make_nongeneric_pair({nd(gen), nd(gen), nd(gen)})), -0.25, 1e-15);
    }
}

TEST(Sectional, SingleTerms) {
    const CoordinateCurvatures cc{0.2, 0.11, -0.37, -0.53, -0.71, 0.29};
    PlanePair pp;
    pp.C = {0, 0, 1, 0};
    pp.D = {1, 0};
    EXPECT_EQ(sectional_curvature(cc, pp), cc.k21);
    PlanePair ng;
    ng.kind = PlaneKind::nongeneric;
    ng.C = {0, 0, 1, 0};
    ng.D = {1, 0};
    EXPECT_EQ(sectional_curvature(cc, ng), cc.kr2);
    ng.D = {0, 1};
    EXPECT_EQ(sectional_curvature(cc, ng), cc.k21);
}

TEST(Sectional, MatchesFullTensorContraction) {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 2000; ++i) {
        const CoordinateCurvatures cc = coordinate_curvatures(random_state(gen), u(gen));
        const CurvatureTensor R = curvature_tensor(cc);
        const PlanePair g = make_plane_pair({nd(gen), nd(gen), nd(gen), nd(gen)});
        EXPECT_NEAR(sectional_curvature(cc, g), tensor_sectional(R, g.C, embed_d(g)), 1e-12);
        const PlanePair ng = make_nongeneric_pair({nd(gen), nd(gen), nd(gen)});
        EXPECT_NEAR(sectional_curvature(cc, ng), tensor_sectional(R, ng.C, embed_d(ng)), 1e-12);
    }
}

TEST(Sectional, ComplexHyperbolicPinching) {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    double lo = 0.0;
    double hi = -1.0;
    for (int ir = 0; ir <= 40; ++ir) {
        const double r = 0.01 + (10.0 - 0.01) * ir / 40.0;
        const WarpState ws = WarpState::complex_hyperbolic(r);
        for (int ic = 0; ic <= 10; ++ic) {
            const CoordinateCurvatures cc = coordinate_curvatures(ws, -0.5 + 0.1 * ic);
            for (int k = 0; k < 250; ++k) {
                const double a = sectional_curvature(cc, make_plane_pair({nd(gen), nd(gen), nd(gen), nd(gen)}));
                const double b = sectional_curvature(cc, make_nongeneric_pair({nd(gen), nd(gen), nd(gen)}));
                lo = std::min({lo, a, b});
                hi = std::max({hi, a, b});
            }
        }
    }
    EXPECT_GE(lo, -1.0 - 1e-9);
    EXPECT_LE(hi, -0.25 + 1e-9);
}

TEST(Sectional, MixedFactorIsOneForComplexHyperbolic) {
    for (int i = 0; i <= 1000; ++i) {
        const double r = 0.01 + 10.0 * i / 1000.0;
        const WarpState ws = WarpState::complex_hyperbolic(r);
        const double factor = ws.v / (ws.h * ws.h) * (ws.v1 / ws.v - ws.h1 / ws.h);
        EXPECT_NEAR(factor, 1.0, 1e-12) << r;
        EXPECT_NEAR(coordinate_curvatures(ws, 0.3).mixed, chn_reference(0.3, ChnKind::mixed_dr), 1e-12);
    }
}

TEST(SupSectional, MatchesOracle) {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 300; ++i) {
        const CoordinateCurvatures cc = coordinate_curvatures(random_state(gen), u(gen));
        const SupResult s = sup_sectional(cc);
        const double o = sup_oracle(cc);
        EXPECT_NEAR(s.value, o, 1e-12 * std::max(1.0, std::abs(o)));
        EXPECT_EQ(sectional_curvature(cc, s.argmax), s.value);
        EXPECT_LT(orthonormality_residual(s.argmax), 1e-14);
    }
}

TEST(SupSectional, DominatesSampledPairs) {
    std::mt19937_64 gen(23);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 50; ++i) {
        const CoordinateCurvatures cc = coordinate_curvatures(random_state(gen), u(gen));
        const double s = sup_sectional(cc).value;
        for (int k = 0; k < 500; ++k) {
            ASSERT_LE(sectional_curvature(cc, make_plane_pair({nd(gen), nd(gen), nd(gen), nd(gen)})), s + 1e-14);
            ASSERT_LE(sectional_curvature(cc, make_nongeneric_pair({nd(gen), nd(gen), nd(gen)})), s + 1e-14);
        }
    }
}

TEST(SupSectional, ConstantCurvature) {
    const CoordinateCurvatures cc{0.0, -0.25, -0.25, -0.25, -0.25, 0.0};
    EXPECT_NEAR(sup_sectional(cc).value, -0.25, 1e-15);
}

TEST(SupSectional, ComplexHyperbolicUpperEndpoint) {
    for (double c : {-0.5, 0.0, 0.5}) {
        EXPECT_NEAR(sup_sectional(WarpState::complex_hyperbolic(1.0), c).value, -0.25, 1e-8) << c;
    }
}

TEST(SupSectional, TailBoundSmallEps) {
    const double eps = 0.002;
    for (double r : {-30.0, -10.0, -3.0, 0.0}) {
        const double ev = eps * std::exp(r);
        const double eh = std::exp(0.5 * r);
        const WarpState ws{r, ev, ev, ev, eh, 0.5 * eh, 0.25 * eh};
        for (int ic = 0; ic <= 20; ++ic) {
            EXPECT_LE(sup_sectional(ws, -0.5 + 0.05 * ic).value, -0.1);
        }
    }
}

TEST(SupSectional, Deterministic) {
    const CoordinateCurvatures cc = coordinate_curvatures(WarpState{0.3, 1.2, 0.7, -0.4, 0.9, 0.3, 0.8}, 0.41);
    const SupResult a = sup_sectional(cc);
    const SupResult b = sup_sectional(cc);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.argmax.C, b.argmax.C);
    EXPECT_EQ(a.argmax.D, b.argmax.D);
    EXPECT_THROW((void)sup_sectional(cc, SupSearchSpec{1, 10, 20}), Error);
}

TEST(Submersion, Values) {
    const SubmersionCurvature a = tube_submersion_curvature(1.0, 1.0, 0.0);
    EXPECT_EQ(a.first, 1.0 / 16.0);
    EXPECT_EQ(a.second, -0.25);
    EXPECT_EQ(tube_submersion_curvature(2.0, 2.0, 0.5).second, -1.1875);
    EXPECT_EQ(tube_submersion_curvature(2.0, 2.0, -0.5).second, -1.1875);
}

TEST(Submersion, ScalingChainReproducesCoordinateCurvatures) {
    std::mt19937_64 gen(29);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 10000; ++i) {
        const WarpState ws = random_state(gen);
        const double c = u(gen);
        const SubmersionCurvature q = tube_submersion_curvature(ws.v, ws.h, c);
        const CoordinateCurvatures cc = coordinate_curvatures(ws, c);
        const double lv = ws.v1 / ws.v;
        const double lh = ws.h1 / ws.h;
        // The (4,0) tensor scales like the metric: lambda_r = h^2 q_r, and Y_1 = X_1 / v.
        const double k21 = ws.h * ws.h / (ws.v * ws.v * ws.h * ws.h) * q.first - lv * lh;
        const double k32 = ws.h * ws.h / (ws.h * ws.h * ws.h * ws.h) * q.second - lh * lh;
        ASSERT_NEAR(k21, cc.k21, 1e-12 * std::max(1.0, std::abs(cc.k21)));
        ASSERT_NEAR(k32, cc.k32, 1e-12 * std::max(1.0, std::abs(cc.k32)));
    }
}

TEST(ATensor, Norms) {
    const ATensorNorms a = a_tensor_norms(1.0, 1.0, 0.5);
    EXPECT_EQ(a.horizontal, 0.25);
    EXPECT_EQ(a.vertical, 0.25);
    const ATensorNorms b = a_tensor_norms(3.0, 2.0, 0.0);
    EXPECT_EQ(b.horizontal, 0.0);
    EXPECT_EQ(b.vertical, 9.0 / 16.0);

    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    const StructureConstants sc = structure_from_complex(standard_complex_structure(2));
    for (int k = 0; k < 100; ++k) {
        const double v = u(gen);
        const double h = u(gen);
        for (int i = 2; i <= 5; ++i) {
            for (int j = 2; j <= 5; ++j) {
                const ATensorNorms n = a_tensor_norms(v, h, sc, i, j);
                EXPECT_NEAR(n.vertical, v * v / (4 * h * h), 1e-14 * v * v / (h * h));
                EXPECT_LE(n.horizontal, v / (4 * h) * (1 + 1e-15));
            }
        }
    }
    EXPECT_THROW((void)a_tensor_norms(1.0, 1.0, sc, 1, 2), Error);
}

TEST(GenericWarp, SpecializationMatchesCoordinateCurvatures) {
    std::mt19937_64 gen(37);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int it = 0; it < 10000; ++it) {
        const WarpState ws = random_state(gen);
        const double c = u(gen);
        const CoordinateCurvatures cc = coordinate_curvatures(ws, c);
        GenericWarpSpec spec;
        spec.m = 3;  // Y_1, Y_2, Y_3 -> 0, 1, 2
        spec.warps = {Jet{ws.v, ws.v1, ws.v2}, Jet{ws.h, ws.h1, ws.h2}, Jet{ws.h, ws.h1, ws.h2}};
        spec.brackets.assign(27, 0.0);
        const double b = c * ws.v / (ws.h * ws.h);
        spec.brackets[(1 * 3 + 2) * 3 + 0] = b;   // [Y_2, Y_3] = c23 v / h^2 Y_1
        spec.brackets[(2 * 3 + 1) * 3 + 0] = -b;
        spec.fiber.assign(81, 0.0);
        const SubmersionCurvature q = tube_submersion_curvature(ws.v, ws.h, c);
        const double f12 = q.first / (ws.v * ws.v);
        const double f23 = q.second / (ws.h * ws.h);
        auto put = [&](int i, int j, double x) {
            spec.fiber[((i * 3 + j) * 3 + j) * 3 + i] = x;
            spec.fiber[((j * 3 + i) * 3 + i) * 3 + j] = x;
        };
        put(0, 1, f12);
        put(0, 2, f12);
        put(1, 2, f23);
        auto close = [](double a, double e) { return std::abs(a - e) <= 1e-12 * std::max(1.0, std::abs(e)); };
        ASSERT_TRUE(close(generic_warped_curvature(spec, WarpComponent::sectional, 1, 0), cc.k21));
        ASSERT_TRUE(close(generic_warped_curvature(spec, WarpComponent::sectional, 2, 0), cc.k21));
        ASSERT_TRUE(close(generic_warped_curvature(spec, WarpComponent::sectional, 2, 1), cc.k32));
        ASSERT_TRUE(close(generic_warped_curvature(spec, WarpComponent::radial, 0, 0), cc.kr1));
        ASSERT_TRUE(close(generic_warped_curvature(spec, WarpComponent::radial, 1, 1), cc.kr2));
        ASSERT_TRUE(close(generic_warped_curvature(spec, WarpComponent::mixed, 0, 1, 2), cc.mixed));
    }
}

TEST(GenericWarp, RulesAndErrors) {
    GenericWarpSpec spec;
    spec.m = 2;
    spec.warps = {Jet{2.0, 0.0, 0.0}, Jet{3.0, 0.0, 0.0}};
    EXPECT_EQ(generic_warped_curvature(spec, WarpComponent::radial, 0, 0), 0.0);
    EXPECT_EQ(generic_warped_curvature(spec, WarpComponent::radial, 1, 1), 0.0);
    EXPECT_EQ(generic_warped_curvature(spec, WarpComponent::sectional, 0, 1), 0.0);
    spec.warps = {Jet{2.0, 1.0, 5.0}, Jet{3.0, 2.0, 7.0}};
    EXPECT_EQ(generic_warped_curvature(spec, WarpComponent::radial, 0, 1), 0.0);
    EXPECT_EQ(generic_warped_curvature(spec, WarpComponent::radial, 0, 0), -2.5);
    EXPECT_NEAR(generic_warped_curvature(spec, WarpComponent::sectional, 0, 1), -1.0 / 3.0, 1e-16);
    EXPECT_NEAR(generic_warped_curvature(spec, WarpComponent::fiber, 0, 1, 0, 1), 1.0 / 3.0, 1e-16);
    EXPECT_THROW((void)generic_warped_curvature(spec, WarpComponent::radial, 0, 2), Error);
    EXPECT_THROW((void)generic_warped_curvature(spec, WarpComponent::mixed, 0, 1, -1), Error);
}

TEST(ChnReference, Values) {
    EXPECT_EQ(chn_reference(0.0, ChnKind::sec), -0.25);
    EXPECT_EQ(chn_reference(0.5, ChnKind::sec), -1.0);
    EXPECT_EQ(chn_reference(-0.5, ChnKind::sec), -1.0);
    EXPECT_EQ(chn_reference(0.3, ChnKind::mixed_dr), -0.3);
    EXPECT_EQ(chn_reference(0.3, ChnKind::vanishing), 0.0);
    EXPECT_THROW((void)chn_reference(0.7, ChnKind::sec), Error);
}
