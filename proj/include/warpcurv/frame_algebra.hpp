#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace warpcurv {

/// Square real matrix, row-major.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0.0) {}

    [[nodiscard]] double& operator()(int i, int j) { return data[static_cast<std::size_t>(i * cols + j)]; }
    [[nodiscard]] double operator()(int i, int j) const { return data[static_cast<std::size_t>(i * cols + j)]; }
};

/// Structure constants of the frame X_1..X_{2n-1}: [X_i, X_j] = c_ij X_1.
/// Stored 0-based, so c(0, j) is c_{1,j+1}.
struct StructureConstants {
    int n = 2;
    Matrix c;

    [[nodiscard]] int size() const { return 2 * n - 1; }
    /// 1-based access matching the usual indexing.
    [[nodiscard]] double at(int i, int j) const { return c(i - 1, j - 1); }
};

/// Standard complex structure on R^{2m}: blocks [[0, -1], [1, 0]].
[[nodiscard]] Matrix standard_complex_structure(int m);

/// c_ij = <e_i, J e_j> / 2 for i, j > 1; first row and column zero.
/// Throws invalid_complex_structure unless J^T J = I and J^2 = -I within 1e-12.
[[nodiscard]] StructureConstants structure_from_complex(const Matrix& J);

struct StructureReport {
    double antisymmetry = 0.0;   // max |c_ij + c_ji|
    double first_row_col = 0.0;  // max |c_1j|, |c_i1|
    double bound = 0.0;          // max(|c_ij| - 1/2, 0)
    double row_sums = 0.0;       // max_i>1 |sum_j c_ij^2 - 1/4|
    double tolerance = 1e-12;

    [[nodiscard]] bool pass() const;
    [[nodiscard]] std::string describe() const;
};

[[nodiscard]] StructureReport validate_structure_constants(const StructureConstants& sc,
                                                           double tolerance = 1e-12);

enum class PlaneKind { generic, nongeneric };

/// Orthonormal pair of tangent vectors in the adapted frame (d_r, Y_1, Y_2, Y_3).
/// Generic: C = (c0, c1, c2, c3), D = (d1, d2) on Y_1, Y_2.
/// Non-generic: C = (c0, c1, c2) on (d_r, Y_1, Y_2), D = (d0, d1) on (d_r, Y_1).
struct PlanePair {
    PlaneKind kind = PlaneKind::generic;
    std::array<double, 4> C{};
    std::array<double, 2> D{};
};

/// Normalizes C and picks D orthogonal to it: D = (-c2, c1) / |(c1, c2)| when that is
/// nonzero, otherwise a unit vector drawn from `seed`. Throws zero_vector on C = 0.
[[nodiscard]] PlanePair make_plane_pair(const std::array<double, 4>& c_raw, std::uint64_t seed = 0);
/// Same for the non-generic family: D = (-c1, c0) / |(c0, c1)|, seeded fallback.
[[nodiscard]] PlanePair make_nongeneric_pair(const std::array<double, 3>& c_raw, std::uint64_t seed = 0);

/// |sum of the sectional-curvature coefficients - 1|; the coefficients add up to one
/// for every orthonormal pair.
[[nodiscard]] double coefficient_identity_residual(const PlanePair& pp);

/// max(| |C| - 1 |, | |D| - 1 |, |<C, D>|).
[[nodiscard]] double orthonormality_residual(const PlanePair& pp);

}  // namespace warpcurv
