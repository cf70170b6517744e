#pragma once

#include <array>
#include <vector>

#include "warpcurv/convex_toolkit.hpp"
#include "warpcurv/frame_algebra.hpp"

namespace warpcurv {

/// Warping functions v (on the circle direction) and h (on the base) at radius r.
struct WarpState {
    double r = 0.0;
    double v = 1.0, v1 = 0.0, v2 = 0.0;
    double h = 1.0, h1 = 0.0, h2 = 0.0;

    /// From jets of ln v and ln h.
    [[nodiscard]] static WarpState from_log_jets(double r, const Jet& log_v, const Jet& log_h);
    [[nodiscard]] static WarpState from_jets(double r, const Jet& v, const Jet& h);
    /// v = sinh r, h = cosh(r/2).
    [[nodiscard]] static WarpState complex_hyperbolic(double r);
};

/// Curvatures of the coordinate planes in the frame (d_r, Y_1, Y_2, Y_3).
struct CoordinateCurvatures {
    double c23 = 0.0;
    double k21 = 0.0;    // K(Y_2, Y_1) = K(Y_3, Y_1)
    double k32 = 0.0;    // K(Y_3, Y_2)
    double kr1 = 0.0;    // K(d_r, Y_1)
    double kr2 = 0.0;    // K(d_r, Y_2) = K(d_r, Y_3)
    double mixed = 0.0;  // <R(d_r, Y_1) Y_2, Y_3>
};

/// Throws domain on v <= 0, h <= 0 or |c23| > 1/2.
[[nodiscard]] CoordinateCurvatures coordinate_curvatures(const WarpState& ws, double c23);

[[nodiscard]] double sectional_curvature(const CoordinateCurvatures& cc, const PlanePair& pp);

/// <R(e_a, e_b) e_c, e_d> in the frame (d_r, Y_1, Y_2, Y_3), index a*64 + b*16 + c*4 + d.
using CurvatureTensor = std::array<double, 256>;
[[nodiscard]] CurvatureTensor curvature_tensor(const CoordinateCurvatures& cc);
/// R(C, D, D, C) for unit orthogonal 4-vectors.
[[nodiscard]] double tensor_sectional(const CurvatureTensor& R, const std::array<double, 4>& C,
                                      const std::array<double, 4>& D);

struct SupSearchSpec {
    int divisions = 24;
    int refine_best = 10;
    int refine_iterations = 20;
};

struct SupResult {
    double value = 0.0;
    PlanePair argmax;
};

/// Maximum sectional curvature over all tangent 2-planes in the span of d_r, Y_1, Y_2, Y_3.
/// Grid over C in angle coordinates, D from the orthogonality constraint, then simplex
/// refinement of the best grid points. The planes with c_1 = c_2 = 0, where D is free,
/// are maximized in closed form. Deterministic.
[[nodiscard]] SupResult sup_sectional(const CoordinateCurvatures& cc, const SupSearchSpec& spec = {});
[[nodiscard]] SupResult sup_sectional(const WarpState& ws, double c23, const SupSearchSpec& spec = {});

/// Fiber-metric curvatures of the submersion q_r = lambda_r / h^2:
/// first = <R(X_1, X_i) X_i, X_1>, second = <R(X_i, X_j) X_j, X_i>.
struct SubmersionCurvature {
    double first = 0.0;
    double second = 0.0;
};
[[nodiscard]] SubmersionCurvature tube_submersion_curvature(double v, double h, double c);

struct ATensorNorms {
    double horizontal = 0.0;  // |A_{X_i} X_j|
    double vertical = 0.0;    // |A_{X_i} X_1|
};
/// For a unit row sum of c^2 (= 1/4).
[[nodiscard]] ATensorNorms a_tensor_norms(double v, double h, double c);
/// From the structure constants, 1-based i, j > 1.
[[nodiscard]] ATensorNorms a_tensor_norms(double v, double h, const StructureConstants& sc, int i, int j);

/// Multiply warped product dr^2 + g_r with g_r-orthonormal Y_i = X_i / h_i.
struct GenericWarpSpec {
    int m = 0;
    std::vector<Jet> warps;          // h_i, h_i', h_i''
    std::vector<double> brackets;    // B_ijk = <[Y_i, Y_j], Y_k>, index (i*m + j)*m + k
    std::vector<double> fiber;       // <R_{g_r}(Y_i, Y_j) Y_l, Y_m>, m^4 entries, empty for flat

    [[nodiscard]] double B(int i, int j, int k) const;
    [[nodiscard]] double fiber_at(int i, int j, int l, int n) const;
};

enum class WarpComponent {
    sectional,  // <R(Y_i, Y_j) Y_j, Y_i>
    fiber,      // <R(Y_i, Y_j) Y_l, Y_m> with {i, j} != {l, m}
    radial,     // <R(Y_i, d_r) d_r, Y_j>
    mixed,      // <R(d_r, Y_i) Y_j, Y_k>
};

/// 0-based indices; unused ones are ignored. Throws domain on out-of-range indices.
[[nodiscard]] double generic_warped_curvature(const GenericWarpSpec& spec, WarpComponent what, int i, int j,
                                              int k = 0, int l = 0);

enum class ChnKind { mixed_dr, sec, vanishing };
/// Complex hyperbolic reference values in terms of c = c_ij.
[[nodiscard]] double chn_reference(double c, ChnKind kind);

}  // namespace warpcurv
