#include "warpcurv/frame_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "warpcurv/error.hpp"

namespace warpcurv {

namespace {

// Unit vector in the plane from a seed; uses raw engine bits so the result does not
// depend on the standard library's distributions.
std::array<double, 2> seeded_unit(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    const double a = 2.0 * std::numbers::pi * u;
    return {std::cos(a), std::sin(a)};
}

}  // namespace

Matrix standard_complex_structure(int m) {
    if (m < 1) throw Error(ErrorKind::parameter, "complex structure needs m >= 1");
    Matrix J(2 * m, 2 * m);
    for (int k = 0; k < m; ++k) {
        J(2 * k, 2 * k + 1) = -1.0;
        J(2 * k + 1, 2 * k) = 1.0;
    }
    return J;
}

StructureConstants structure_from_complex(const Matrix& J) {
    const int d = J.rows;
    if (d != J.cols || d < 2 || d % 2 != 0) {
        throw Error(ErrorKind::invalid_complex_structure, "J must be square of even size >= 2");
    }
    double orth = 0.0;
    double square = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double jtj = 0.0;
            double jj = 0.0;
            for (int k = 0; k < d; ++k) {
                jtj += J(k, i) * J(k, j);
                jj += J(i, k) * J(k, j);
            }
            orth = std::max(orth, std::abs(jtj - (i == j ? 1.0 : 0.0)));
            square = std::max(square, std::abs(jj + (i == j ? 1.0 : 0.0)));
        }
    }
    if (orth > 1e-12 || square > 1e-12) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "J is not an orthogonal complex structure: |J^T J - I| = %.3g, |J^2 + I| = %.3g",
                      orth, square);
        throw Error(ErrorKind::invalid_complex_structure, buf);
    }

    StructureConstants sc;
    sc.n = d / 2 + 1;
    sc.c = Matrix(d + 1, d + 1);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) sc.c(i + 1, j + 1) = 0.5 * J(i, j);
    }
    const StructureReport rep = validate_structure_constants(sc);
    if (!rep.pass()) throw Error(ErrorKind::invalid_complex_structure, rep.describe());
    return sc;
}

bool StructureReport::pass() const {
    return antisymmetry <= tolerance && first_row_col <= tolerance && bound <= tolerance && row_sums <= tolerance;
}

std::string StructureReport::describe() const {
    char buf[200];
    std::snprintf(buf, sizeof buf, "antisymmetry %.3g, first row/column %.3g, bound %.3g, row sums %.3g (tol %.3g)",
                  antisymmetry, first_row_col, bound, row_sums, tolerance);
    return buf;
}

StructureReport validate_structure_constants(const StructureConstants& sc, double tolerance) {
    StructureReport r;
    r.tolerance = tolerance;
    const int s = sc.c.rows;
    for (int i = 0; i < s; ++i) {
        double row = 0.0;
        for (int j = 0; j < s; ++j) {
            const double c = sc.c(i, j);
            r.antisymmetry = std::max(r.antisymmetry, std::abs(c + sc.c(j, i)));
            if (i == 0 || j == 0) r.first_row_col = std::max(r.first_row_col, std::abs(c));
            r.bound = std::max(r.bound, std::abs(c) - 0.5);
            if (j > 0) row += c * c;
        }
        if (i > 0) r.row_sums = std::max(r.row_sums, std::abs(row - 0.25));
    }
    return r;
}

PlanePair make_plane_pair(const std::array<double, 4>& c_raw, std::uint64_t seed) {
    const double norm = std::hypot(std::hypot(c_raw[0], c_raw[1]), std::hypot(c_raw[2], c_raw[3]));
    if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorKind::zero_vector, "C must be a nonzero finite vector");
    PlanePair pp;
    pp.kind = PlaneKind::generic;
    for (int i = 0; i < 4; ++i) pp.C[static_cast<std::size_t>(i)] = c_raw[static_cast<std::size_t>(i)] / norm;
    const double t = std::hypot(pp.C[1], pp.C[2]);
    if (t > 0.0) {
        pp.D = {-pp.C[2] / t, pp.C[1] / t};
    } else {
        pp.D = seeded_unit(seed);
    }
    return pp;
}

PlanePair make_nongeneric_pair(const std::array<double, 3>& c_raw, std::uint64_t seed) {
    const double norm = std::hypot(c_raw[0], c_raw[1], c_raw[2]);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorKind::zero_vector, "C must be a nonzero finite vector");
    PlanePair pp;
    pp.kind = PlaneKind::nongeneric;
    pp.C = {c_raw[0] / norm, c_raw[1] / norm, c_raw[2] / norm, 0.0};
    const double t = std::hypot(pp.C[0], pp.C[1]);
    if (t > 0.0) {
        pp.D = {-pp.C[1] / t, pp.C[0] / t};
    } else {
        pp.D = seeded_unit(seed);
    }
    return pp;
}

double coefficient_identity_residual(const PlanePair& pp) {
    const auto& c = pp.C;
    const auto& d = pp.D;
    double sum = 0.0;
    if (pp.kind == PlaneKind::generic) {
        const double w = d[0] * c[2] - d[1] * c[1];
        sum = w * w + (d[0] * d[0] + d[1] * d[1]) * (c[0] * c[0] + c[3] * c[3]);
    } else {
        const double w = d[0] * c[1] - d[1] * c[0];
        sum = w * w + (d[0] * d[0] + d[1] * d[1]) * c[2] * c[2];
    }
    return std::abs(sum - 1.0);
}

double orthonormality_residual(const PlanePair& pp) {
    const auto& c = pp.C;
    const auto& d = pp.D;
    const double cc = c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3];
    const double dd = d[0] * d[0] + d[1] * d[1];
    // D sits on (Y_1, Y_2) for generic pairs and on (d_r, Y_1) otherwise.
    const double cd = pp.kind == PlaneKind::generic ? d[0] * c[1] + d[1] * c[2] : d[0] * c[0] + d[1] * c[1];
    return std::max({std::abs(std::sqrt(cc) - 1.0), std::abs(std::sqrt(dd) - 1.0), std::abs(cd)});
}

}  // namespace warpcurv
