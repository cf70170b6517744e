#include "warpcurv/curvature_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "warpcurv/error.hpp"

namespace warpcurv {

WarpState WarpState::from_log_jets(double r, const Jet& log_v, const Jet& log_h) {
    WarpState ws;
    ws.r = r;
    ws.v = std::exp(log_v.v);
    ws.v1 = ws.v * log_v.d1;
    ws.v2 = ws.v * (log_v.d2 + log_v.d1 * log_v.d1);
    ws.h = std::exp(log_h.v);
    ws.h1 = ws.h * log_h.d1;
    ws.h2 = ws.h * (log_h.d2 + log_h.d1 * log_h.d1);
    return ws;
}

WarpState WarpState::from_jets(double r, const Jet& v, const Jet& h) {
    return WarpState{r, v.v, v.d1, v.d2, h.v, h.d1, h.d2};
}

WarpState WarpState::complex_hyperbolic(double r) {
    const double c = std::cosh(0.5 * r);
    const double s = std::sinh(0.5 * r);
    return WarpState{r, std::sinh(r), std::cosh(r), std::sinh(r), c, 0.5 * s, 0.25 * c};
}

CoordinateCurvatures coordinate_curvatures(const WarpState& ws, double c23) {
    if (!(ws.v > 0.0) || !(ws.h > 0.0)) {
        throw Error(ErrorKind::domain, "warping functions must be positive at r = " + std::to_string(ws.r));
    }
    if (!(std::abs(c23) <= 0.5)) throw Error(ErrorKind::domain, "|c23| must not exceed 1/2");
    const double lv = ws.v1 / ws.v;
    const double lh = ws.h1 / ws.h;
    const double inv_h2 = 1.0 / ws.h / ws.h;
    const double vh2 = ws.v / ws.h / ws.h;
    const double c2 = c23 * c23;
    CoordinateCurvatures cc;
    cc.c23 = c23;
    cc.k21 = vh2 * vh2 / 16.0 - lv * lh;
    cc.k32 = -0.25 * inv_h2 - 3.0 * c2 * inv_h2 - 0.75 * c2 * vh2 * vh2 - lh * lh;
    cc.kr1 = -ws.v2 / ws.v;
    cc.kr2 = -ws.h2 / ws.h;
    cc.mixed = -c23 * vh2 * (lv - lh);
    return cc;
}

double sectional_curvature(const CoordinateCurvatures& cc, const PlanePair& pp) {
    const auto& c = pp.C;
    const auto& d = pp.D;
    if (pp.kind == PlaneKind::nongeneric) {
        const double w = d[0] * c[1] - d[1] * c[0];
        return w * w * cc.kr1 + d[0] * d[0] * c[2] * c[2] * cc.kr2 + d[1] * d[1] * c[2] * c[2] * cc.k21;
    }
    const double w = d[0] * c[2] - d[1] * c[1];
    return w * w * cc.k21 + d[0] * d[0] * c[3] * c[3] * cc.k21 + d[0] * d[0] * c[0] * c[0] * cc.kr1 +
           d[1] * d[1] * c[0] * c[0] * cc.kr2 + d[1] * d[1] * c[3] * c[3] * cc.k32 +
           3.0 * d[0] * d[1] * c[0] * c[3] * cc.mixed;
}

namespace {

constexpr int idx(int a, int b, int c, int d) { return a * 64 + b * 16 + c * 4 + d; }

void set_with_symmetries(CurvatureTensor& R, int a, int b, int c, int d, double x) {
    R[idx(a, b, c, d)] = x;
    R[idx(b, a, c, d)] = -x;
    R[idx(a, b, d, c)] = -x;
    R[idx(b, a, d, c)] = x;
    R[idx(c, d, a, b)] = x;
    R[idx(d, c, a, b)] = -x;
    R[idx(c, d, b, a)] = -x;
    R[idx(d, c, b, a)] = x;
}

}  // namespace

CurvatureTensor curvature_tensor(const CoordinateCurvatures& cc) {
    CurvatureTensor R{};
    const double K[4][4] = {{0, cc.kr1, cc.kr2, cc.kr2},
                            {cc.kr1, 0, cc.k21, cc.k21},
                            {cc.kr2, cc.k21, 0, cc.k32},
                            {cc.kr2, cc.k21, cc.k32, 0}};
    for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) set_with_symmetries(R, a, b, b, a, K[a][b]);
    }
    // Only mixed components with all four indices distinct survive; the first
    // Bianchi identity fixes the third from the other two.
    set_with_symmetries(R, 0, 1, 2, 3, cc.mixed);
    set_with_symmetries(R, 0, 2, 1, 3, 0.5 * cc.mixed);
    set_with_symmetries(R, 0, 3, 1, 2, -0.5 * cc.mixed);
    return R;
}

double tensor_sectional(const CurvatureTensor& R, const std::array<double, 4>& C, const std::array<double, 4>& D) {
    double s = 0.0;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            for (int c = 0; c < 4; ++c) {
                for (int d = 0; d < 4; ++d) s += R[idx(a, b, c, d)] * C[a] * D[b] * D[c] * C[d];
            }
        }
    }
    return s;
}

namespace {

// K = sum of coef[i] * (k21, kr1, kr2, k32, mixed)[i].
using Coef = std::array<double, 5>;

std::array<double, 5> curv_vector(const CoordinateCurvatures& cc) {
    return {cc.k21, cc.kr1, cc.kr2, cc.k32, cc.mixed};
}

std::array<double, 4> generic_c(double a, double b, double g) {
    const double sa = std::sin(a);
    const double sb = std::sin(b);
    return {std::cos(a), sa * std::cos(b), sa * sb * std::cos(g), sa * sb * std::sin(g)};
}

std::array<double, 4> nongeneric_c(double a, double b) {
    const double sa = std::sin(a);
    return {std::cos(a), sa * std::cos(b), sa * std::sin(b), 0.0};
}

// Below this |(c1, c2)| (resp. |(c0, c1)|) D is treated as free.
constexpr double kDegenerate = 1e-12;

// D is quadratic in every term, so D and -D give the same value; one sign suffices.
bool pair_of(PlaneKind kind, const std::array<double, 4>& C, PlanePair& pp) {
    pp.kind = kind;
    pp.C = C;
    const double t = kind == PlaneKind::generic ? std::hypot(C[1], C[2]) : std::hypot(C[0], C[1]);
    if (t < kDegenerate) return false;
    pp.D = kind == PlaneKind::generic ? std::array<double, 2>{-C[2] / t, C[1] / t}
                                      : std::array<double, 2>{-C[1] / t, C[0] / t};
    return true;
}

Coef coefficients(const PlanePair& pp) {
    const auto& c = pp.C;
    const auto& d = pp.D;
    if (pp.kind == PlaneKind::nongeneric) {
        const double w = d[0] * c[1] - d[1] * c[0];
        return {d[1] * d[1] * c[2] * c[2], w * w, d[0] * d[0] * c[2] * c[2], 0.0, 0.0};
    }
    const double w = d[0] * c[2] - d[1] * c[1];
    return {w * w + d[0] * d[0] * c[3] * c[3], d[0] * d[0] * c[0] * c[0], d[1] * d[1] * c[0] * c[0],
            d[1] * d[1] * c[3] * c[3], 3.0 * d[0] * d[1] * c[0] * c[3]};
}

struct GridPoint {
    PlaneKind kind;
    std::array<double, 3> angles;
    Coef coef;
};

std::vector<GridPoint> build_grid(int n) {
    std::vector<GridPoint> grid;
    const double pi = std::numbers::pi;
    PlanePair pp;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            for (int k = 0; k < n; ++k) {
                const std::array<double, 3> ang{pi * i / n, pi * j / n, 2.0 * pi * k / n};
                if (pair_of(PlaneKind::generic, generic_c(ang[0], ang[1], ang[2]), pp)) {
                    grid.push_back({PlaneKind::generic, ang, coefficients(pp)});
                }
            }
        }
    }
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j < n; ++j) {
            const std::array<double, 3> ang{pi * i / n, 2.0 * pi * j / n, 0.0};
            if (pair_of(PlaneKind::nongeneric, nongeneric_c(ang[0], ang[1]), pp)) {
                grid.push_back({PlaneKind::nongeneric, ang, coefficients(pp)});
            }
        }
    }
    return grid;
}

const std::vector<GridPoint>& grid_for(int n) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const std::vector<GridPoint>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<const std::vector<GridPoint>>(build_grid(n));
    return *slot;
}

double dot(const Coef& a, const std::array<double, 5>& k) {
    return a[0] * k[0] + a[1] * k[1] + a[2] * k[2] + a[3] * k[3] + a[4] * k[4];
}

PlanePair pair_at(PlaneKind kind, const std::array<double, 3>& ang) {
    PlanePair pp;
    const auto C = kind == PlaneKind::generic ? generic_c(ang[0], ang[1], ang[2]) : nongeneric_c(ang[0], ang[1]);
    if (!pair_of(kind, C, pp)) pp.D = {1.0, 0.0};
    return pp;
}

// Downhill simplex in angle space, fixed coefficients and iteration count.
std::array<double, 3> nelder_mead(PlaneKind kind, const std::array<double, 3>& start, double step, int iters,
                                  const std::array<double, 5>& k) {
    const int dim = kind == PlaneKind::generic ? 3 : 2;
    auto f = [&](const std::array<double, 3>& x) { return -dot(coefficients(pair_at(kind, x)), k); };
    std::vector<std::array<double, 3>> s(static_cast<std::size_t>(dim + 1), start);
    for (int i = 0; i < dim; ++i) s[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(i)] += step;
    std::vector<double> fs(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) fs[i] = f(s[i]);
    std::vector<std::size_t> order(s.size());

    auto blend = [&](const std::array<double, 3>& a, const std::array<double, 3>& b, double t) {
        std::array<double, 3> out{};
        for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] = a[i] + t * (b[i] - a[i]);
        return out;
    };
    for (int it = 0; it < iters; ++it) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        const std::size_t worst = order.back();
        std::array<double, 3> centroid{};
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            for (int d = 0; d < 3; ++d) centroid[static_cast<std::size_t>(d)] += s[order[i]][d] / dim;
        }
        const auto xr = blend(centroid, s[worst], -1.0);
        const double fr = f(xr);
        if (fr < fs[order.front()]) {
            const auto xe = blend(centroid, s[worst], -2.0);
            const double fe = f(xe);
            if (fe < fr) {
                s[worst] = xe;
                fs[worst] = fe;
            } else {
                s[worst] = xr;
                fs[worst] = fr;
            }
        } else if (fr < fs[order[order.size() - 2]]) {
            s[worst] = xr;
            fs[worst] = fr;
        } else {
            const auto xc = blend(centroid, s[worst], 0.5);
            const double fc = f(xc);
            if (fc < fs[worst]) {
                s[worst] = xc;
                fs[worst] = fc;
            } else {
                const auto best = s[order.front()];
                for (std::size_t i = 1; i < order.size(); ++i) {
                    s[order[i]] = blend(best, s[order[i]], 0.5);
                    fs[order[i]] = f(s[order[i]]);
                }
            }
        }
    }
    const auto best = std::min_element(fs.begin(), fs.end()) - fs.begin();
    return s[static_cast<std::size_t>(best)];
}

// Generic planes with C = (cos a, 0, 0, sin a): any unit D on (Y_1, Y_2) is allowed,
// and the value is a quadratic form in D whose top eigenvalue is explicit.
struct FreeD {
    double value;
    std::array<double, 2> D;
};

FreeD free_d_max(const CoordinateCurvatures& cc, double a) {
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    const double P = sa * sa * cc.k21 + ca * ca * cc.kr1;
    const double Q = ca * ca * cc.kr2 + sa * sa * cc.k32;
    const double S = 1.5 * ca * sa * cc.mixed;
    const double half = 0.5 * (P - Q);
    const double rad = std::hypot(half, S);
    const double lam = 0.5 * (P + Q) + rad;
    // Eigenvector of [[P, S], [S, Q]] for lam.
    std::array<double, 2> D{1.0, 0.0};
    if (rad > 0.0) {
        const double x = half + rad;
        const double y = S;
        const double nrm = std::hypot(x, y);
        if (nrm > 0.0) D = {x / nrm, y / nrm};
        else D = {0.0, 1.0};
    } else if (Q > P) {
        D = {0.0, 1.0};
    }
    return {lam, D};
}

}  // namespace

SupResult sup_sectional(const CoordinateCurvatures& cc, const SupSearchSpec& spec) {
    if (spec.divisions < 2 || spec.refine_best < 0 || spec.refine_iterations < 0) {
        throw Error(ErrorKind::parameter, "invalid plane search specification");
    }
    const auto k = curv_vector(cc);
    const auto& grid = grid_for(spec.divisions);

    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = dot(grid[i].coef, k);
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t nbest = std::min(order.size(), static_cast<std::size_t>(spec.refine_best));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(nbest), order.end(),
                      [&](std::size_t a, std::size_t b) { return vals[a] > vals[b] || (vals[a] == vals[b] && a < b); });

    SupResult best;
    best.value = -std::numeric_limits<double>::infinity();
    auto offer = [&](const PlanePair& pp) {
        const double value = sectional_curvature(cc, pp);
        if (value > best.value) {
            best.value = value;
            best.argmax = pp;
        }
    };
    if (!order.empty()) offer(pair_at(grid[order[0]].kind, grid[order[0]].angles));

    const double step = 0.5 * std::numbers::pi / spec.divisions;
    for (std::size_t r = 0; r < nbest; ++r) {
        const GridPoint& g = grid[order[r]];
        const auto x = nelder_mead(g.kind, g.angles, step, spec.refine_iterations, k);
        const PlanePair pp = pair_at(g.kind, x);
        offer(pp);
    }

    // Free-D generic planes: scan the angle, then golden-section on the best bracket.
    const int na = 4 * spec.divisions;
    const double pi = std::numbers::pi;
    int ib = 0;
    double vb = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < na; ++i) {
        const double v = free_d_max(cc, pi * i / na).value;
        if (v > vb) {
            vb = v;
            ib = i;
        }
    }
    double lo = pi * (ib - 1) / na;
    double hi = pi * (ib + 1) / na;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80; ++it) {
        const double x1 = hi - gr * (hi - lo);
        const double x2 = lo + gr * (hi - lo);
        if (free_d_max(cc, x1).value >= free_d_max(cc, x2).value) hi = x2;
        else lo = x1;
    }
    for (double a : {pi * ib / na, 0.5 * (lo + hi)}) {
        const FreeD fd = free_d_max(cc, a);
        PlanePair pp;
        pp.kind = PlaneKind::generic;
        pp.C = {std::cos(a), 0.0, 0.0, std::sin(a)};
        pp.D = fd.D;
        offer(pp);
    }

    // Free-D non-generic planes: C = Y_2, D on (d_r, Y_1).
    PlanePair ng;
    ng.kind = PlaneKind::nongeneric;
    ng.C = {0.0, 0.0, 1.0, 0.0};
    ng.D = cc.kr2 >= cc.k21 ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
    offer(ng);
    return best;
}

SupResult sup_sectional(const WarpState& ws, double c23, const SupSearchSpec& spec) {
    return sup_sectional(coordinate_curvatures(ws, c23), spec);
}

SubmersionCurvature tube_submersion_curvature(double v, double h, double c) {
    if (!(v > 0.0) || !(h > 0.0)) throw Error(ErrorKind::domain, "v and h must be positive");
    const double q = v / h;
    return {q * q * q * q / 16.0, -0.25 - 3.0 * c * c - 0.75 * c * c * q * q};
}

ATensorNorms a_tensor_norms(double v, double h, double c) {
    if (!(v > 0.0) || !(h > 0.0)) throw Error(ErrorKind::domain, "v and h must be positive");
    const double q = v / h;
    return {0.5 * std::abs(c) * q, 0.25 * q * q};
}

ATensorNorms a_tensor_norms(double v, double h, const StructureConstants& sc, int i, int j) {
    if (!(v > 0.0) || !(h > 0.0)) throw Error(ErrorKind::domain, "v and h must be positive");
    if (i < 2 || j < 2 || i > sc.size() || j > sc.size()) throw Error(ErrorKind::domain, "indices must lie in 2..2n-1");
    const double q = v / h;
    double row = 0.0;
    for (int k = 2; k <= sc.size(); ++k) row += sc.at(i, k) * sc.at(i, k);
    return {0.5 * std::abs(sc.at(i, j)) * q, 0.5 * q * q * std::sqrt(row)};
}

double GenericWarpSpec::B(int i, int j, int k) const {
    if (brackets.empty()) return 0.0;
    return brackets[static_cast<std::size_t>((i * m + j) * m + k)];
}

double GenericWarpSpec::fiber_at(int i, int j, int l, int n) const {
    if (fiber.empty()) return 0.0;
    return fiber[static_cast<std::size_t>(((i * m + j) * m + l) * m + n)];
}

double generic_warped_curvature(const GenericWarpSpec& spec, WarpComponent what, int i, int j, int k, int l) {
    const int m = spec.m;
    if (m < 1 || static_cast<int>(spec.warps.size()) != m) throw Error(ErrorKind::domain, "spec needs m warps");
    if (!spec.brackets.empty() && static_cast<int>(spec.brackets.size()) != m * m * m) {
        throw Error(ErrorKind::domain, "brackets need m^3 entries");
    }
    if (!spec.fiber.empty() && static_cast<int>(spec.fiber.size()) != m * m * m * m) {
        throw Error(ErrorKind::domain, "fiber curvature needs m^4 entries");
    }
    auto in = [m](int x) { return x >= 0 && x < m; };
    const bool uses_kl = what == WarpComponent::fiber || what == WarpComponent::mixed;
    if (!in(i) || !in(j) || (uses_kl && !in(k)) || (what == WarpComponent::fiber && !in(l))) {
        throw Error(ErrorKind::domain, "warp component index out of range");
    }
    auto slope = [&](int x) { return spec.warps[static_cast<std::size_t>(x)].d1 / spec.warps[static_cast<std::size_t>(x)].v; };
    auto sectional = [&](int a, int b) {
        if (a == b) return 0.0;
        return spec.fiber_at(a, b, b, a) - slope(a) * slope(b);
    };
    switch (what) {
        case WarpComponent::sectional:
            return sectional(i, j);
        case WarpComponent::fiber:
            if (k == j && l == i) return sectional(i, j);
            if (k == i && l == j) return -sectional(i, j);
            return spec.fiber_at(i, j, k, l);
        case WarpComponent::radial:
            if (i != j) return 0.0;
            return -spec.warps[static_cast<std::size_t>(i)].d2 / spec.warps[static_cast<std::size_t>(i)].v;
        case WarpComponent::mixed:
            return 0.5 * (spec.B(i, j, k) * (slope(k) - slope(j)) + spec.B(k, i, j) * (slope(j) - slope(k)) +
                          spec.B(k, j, i) * (2.0 * slope(i) - slope(j) - slope(k)));
    }
    return 0.0;
}

double chn_reference(double c, ChnKind kind) {
    if (!(std::abs(c) <= 0.5)) throw Error(ErrorKind::domain, "|c| must not exceed 1/2");
    switch (kind) {
        case ChnKind::mixed_dr:
            return -c;
        case ChnKind::sec:
            return -0.25 - 3.0 * c * c;
        case ChnKind::vanishing:
            return 0.0;
    }
    return 0.0;
}

}  // namespace warpcurv
