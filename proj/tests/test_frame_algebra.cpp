#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "warpcurv/error.hpp"
#include "warpcurv/frame_algebra.hpp"

using namespace warpcurv;

namespace {

// Random orthogonal complex structure: Q J0 Q^T with Q orthogonal (Gram-Schmidt on a
// seeded Gaussian matrix).
Matrix random_complex_structure(int m, std::uint64_t seed) {
    const int d = 2 * m;
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Matrix Q(d, d);
    for (double& x : Q.data) x = nd(gen);
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < j; ++k) {
            double dot = 0.0;
            for (int i = 0; i < d; ++i) dot += Q(i, j) * Q(i, k);
            for (int i = 0; i < d; ++i) Q(i, j) -= dot * Q(i, k);
        }
        double norm = 0.0;
        for (int i = 0; i < d; ++i) norm += Q(i, j) * Q(i, j);
        norm = std::sqrt(norm);
        for (int i = 0; i < d; ++i) Q(i, j) /= norm;
    }
    const Matrix J0 = standard_complex_structure(m);
    Matrix out(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) s += Q(i, a) * J0(a, b) * Q(j, b);
            }
            out(i, j) = s;
        }
    }
    return out;
}

}  // namespace

TEST(StructureFromComplex, ComplexDimensionTwo) {
    const StructureConstants sc = structure_from_complex(standard_complex_structure(1));
    EXPECT_EQ(sc.n, 2);
    EXPECT_EQ(sc.size(), 3);
    EXPECT_EQ(std::abs(sc.at(2, 3)), 0.5);
    EXPECT_EQ(sc.at(2, 3), -sc.at(3, 2));
    for (int j = 1; j <= 3; ++j) {
        EXPECT_EQ(sc.at(1, j), 0.0);
        EXPECT_EQ(sc.at(j, 1), 0.0);
    }
}

TEST(StructureFromComplex, BlockDiagonalRowsHaveOneHalf) {
    const StructureConstants sc = structure_from_complex(standard_complex_structure(2));
    EXPECT_EQ(sc.n, 3);
    for (int i = 2; i <= 5; ++i) {
        int halves = 0;
        for (int j = 1; j <= 5; ++j) {
            const double c = std::abs(sc.at(i, j));
            if (c == 0.5) ++halves;
            else EXPECT_EQ(c, 0.0);
        }
        EXPECT_EQ(halves, 1) << "row " << i;
    }
}

TEST(StructureFromComplex, RandomStructuresSatisfyIdentities) {
    for (int m = 1; m <= 4; ++m) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const StructureConstants sc = structure_from_complex(random_complex_structure(m, seed));
            const StructureReport rep = validate_structure_constants(sc);
            EXPECT_TRUE(rep.pass()) << rep.describe();
            EXPECT_LT(rep.row_sums, 1e-12);
            // e_i -> -2 sum_j c_ij e_j is an isometry of the horizontal coefficients.
            const int s = sc.size();
            for (int i = 2; i <= s; ++i) {
                for (int k = 2; k <= s; ++k) {
                    double dot = 0.0;
                    for (int j = 2; j <= s; ++j) dot += 4.0 * sc.at(i, j) * sc.at(k, j);
                    EXPECT_NEAR(dot, i == k ? 1.0 : 0.0, 1e-12);
                }
            }
        }
    }
}

TEST(StructureFromComplex, RejectsNonComplexStructures) {
    Matrix J(2, 2);
    J(0, 1) = 1.0;
    J(1, 0) = 1.0;  // J^2 = +I
    try {
        (void)structure_from_complex(J);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_complex_structure);
    }
    Matrix scaled = standard_complex_structure(1);
    for (double& x : scaled.data) x *= 2.0;
    EXPECT_THROW((void)structure_from_complex(scaled), Error);
    EXPECT_THROW((void)structure_from_complex(Matrix(3, 3)), Error);
}

TEST(ValidateStructure, ReportsEachViolation) {
    StructureConstants sc = structure_from_complex(standard_complex_structure(1));
    sc.c(1, 2) = 0.3;
    sc.c(2, 1) = -0.3;
    StructureReport rep = validate_structure_constants(sc);
    EXPECT_FALSE(rep.pass());
    EXPECT_NEAR(rep.row_sums, 0.25 - 0.09, 1e-15);
    EXPECT_EQ(rep.antisymmetry, 0.0);

    sc = structure_from_complex(standard_complex_structure(1));
    sc.c(0, 1) = 0.1;
    sc.c(1, 0) = -0.1;
    rep = validate_structure_constants(sc);
    EXPECT_FALSE(rep.pass());
    EXPECT_NEAR(rep.first_row_col, 0.1, 1e-15);

    sc = structure_from_complex(standard_complex_structure(1));
    sc.c(1, 2) = 0.7;
    rep = validate_structure_constants(sc);
    EXPECT_NEAR(rep.bound, 0.2, 1e-15);
    EXPECT_GT(rep.antisymmetry, 0.1);
}

TEST(MakePlanePair, Examples) {
    PlanePair pp = make_plane_pair({0, 1, 0, 0});
    EXPECT_EQ(pp.D[0], 0.0);
    EXPECT_EQ(std::abs(pp.D[1]), 1.0);

    pp = make_plane_pair({0, 3, 4, 0});
    EXPECT_NEAR(pp.C[1], 0.6, 1e-16);
    EXPECT_NEAR(pp.C[2], 0.8, 1e-16);
    EXPECT_NEAR(std::abs(pp.D[0]), 0.8, 1e-16);
    EXPECT_NEAR(pp.D[0] * pp.D[1], -0.8 * 0.6, 1e-16);

    const PlanePair a = make_plane_pair({1, 0, 0, 0}, 7);
    const PlanePair b = make_plane_pair({1, 0, 0, 0}, 7);
    const PlanePair c = make_plane_pair({1, 0, 0, 0}, 8);
    EXPECT_EQ(a.D, b.D);
    EXPECT_NE(a.D, c.D);
    EXPECT_NEAR(std::hypot(a.D[0], a.D[1]), 1.0, 1e-15);
}

TEST(MakePlanePair, ZeroVector) {
    try {
        (void)make_plane_pair({0, 0, 0, 0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::zero_vector);
    }
    EXPECT_THROW((void)make_nongeneric_pair({0, 0, 0}), Error);
}

TEST(CoefficientIdentity, SampledPairs) {
    std::mt19937_64 gen(20261019);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    double worst_ng = 0.0;
    double worst_orth = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const PlanePair g = make_plane_pair({nd(gen), nd(gen), nd(gen), nd(gen)}, i);
        worst = std::max(worst, coefficient_identity_residual(g));
        worst_orth = std::max(worst_orth, orthonormality_residual(g));
        const PlanePair ng = make_nongeneric_pair({nd(gen), nd(gen), nd(gen)}, i);
        worst_ng = std::max(worst_ng, coefficient_identity_residual(ng));
        worst_orth = std::max(worst_orth, orthonormality_residual(ng));
        // For orthonormal non-generic pairs the cross term equals c0^2 + c1^2.
        const double w = ng.D[0] * ng.C[1] - ng.D[1] * ng.C[0];
        ASSERT_NEAR(w * w, ng.C[0] * ng.C[0] + ng.C[1] * ng.C[1], 1e-14);
    }
    EXPECT_LT(worst, 1e-13);
    EXPECT_LT(worst_ng, 1e-13);
    EXPECT_LT(worst_orth, 1e-14);
}

TEST(CoefficientIdentity, UnnormalizedDIsDetected) {
    PlanePair pp = make_plane_pair({0.3, -0.2, 0.5, 0.7});
    pp.D[0] *= 1.1;
    pp.D[1] *= 1.1;
    EXPECT_NEAR(coefficient_identity_residual(pp), 1.21 - 1.0, 1e-12);
}
