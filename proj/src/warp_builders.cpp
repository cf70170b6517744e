#include "warpcurv/warp_builders.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "warpcurv/error.hpp"

namespace warpcurv {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Windows at the requested centers, each sigma clamped to 0.4 of the distance to the
// nearest other breakpoint; delta keeps its ratio to sigma.
std::vector<Window> make_windows(const std::vector<double>& breakpoints,
                                 const std::vector<double>& centers, const EpsilonParams& p) {
    std::vector<Window> out;
    for (double c : centers) {
        double gap = std::numeric_limits<double>::infinity();
        for (double b : breakpoints) {
            if (b != c) gap = std::min(gap, std::abs(b - c));
        }
        const double sigma = std::min(p.sigma, 0.4 * gap);
        out.push_back(Window{c, p.delta * (sigma / p.sigma), sigma});
    }
    return out;
}

// Quadratic coefficient for a bend on [a1, a2] at c between slopes s1 < s2: each
// correction moves its slope at c by at most bend_fraction of the gap.
double bend_coefficient(double s1, double s2, double a1, double c, double a2, double fraction) {
    const double left = c - a1;
    const double right = a2 - c;
    return fraction * (s2 - s1) / (2.0 * left) * std::min(1.0, right / left);
}

void check_bend(const SmoothedFunction& bold, const char* what) {
    const double margin = min_second_derivative_margin(bold, 0, 0.0, 1000);
    if (!(margin > 0.0)) {
        throw Error(ErrorKind::construction,
                    std::string(what) + ": bent log-profile is not strictly convex on its window (margin " +
                        num(margin) + ")");
    }
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return out;
}

}  // namespace

EpsilonParams default_params(double eps) {
    EpsilonParams p;
    p.eps = eps;
    p.sigma = std::pow(eps, 4) / 8.0;
    p.delta = p.sigma / 16384.0;
    return p;
}

void validate(const EpsilonParams& p) {
    if (!(p.eps > 0.0 && p.eps < 0.3)) {
        throw Error(ErrorKind::parameter, "eps must lie in (0, 0.3), got " + num(p.eps));
    }
    if (!(p.sigma > 0.0) || !(p.delta > 0.0)) {
        throw Error(ErrorKind::parameter, "sigma and delta must be positive");
    }
    if (!(p.delta < 0.25 * p.sigma)) {
        throw Error(ErrorKind::parameter, "delta must be below sigma / 4");
    }
    if (!(p.bend_fraction > 0.0 && p.bend_fraction < 0.5)) {
        throw Error(ErrorKind::parameter, "bend_fraction must lie in (0, 0.5)");
    }
    if (p.strict_regime) {
        if (p.eps < 0.05) {
            throw Error(ErrorKind::parameter,
                        "strict regime is only supported for eps >= 0.05 (double precision)");
        }
        if (!(p.sigma < std::pow(p.eps, 8))) {
            throw Error(ErrorKind::parameter, "strict regime needs sigma < eps^8");
        }
    }
}

double solve_r_epsilon(double eps) {
    if (!(eps > 0.0)) throw Error(ErrorKind::parameter, "eps must be positive");
    if (!(eps < 0.5)) throw Error(ErrorKind::no_solution, "sinh(r) = eps e^r has no root for eps >= 1/2");
    return -0.5 * std::log1p(-2.0 * eps);
}

double HProfile::q(double r) const {
    const double s = r - rho_eps;
    return q0 + s * (q1 + q2 * s);
}

double HProfile::dq(double r) const { return q1 + 2.0 * q2 * (r - rho_eps); }

double GProfile::F(double r) const { return 0.5 / (1.0 + std::exp(o_eps - 0.5 * r)); }

VProfile build_v(const EpsilonParams& params) {
    validate(params);
    VProfile v;
    v.params = params;
    const double eps = params.eps;
    const double e4 = std::pow(eps, 4);
    v.r_eps = solve_r_epsilon(eps);
    v.r_minus = v.r_eps - e4;

    double offset = 0.5 * e4;
    bool found = false;
    for (int attempt = 0; attempt < 50 && !found; ++attempt) {
        v.r_plus = v.r_eps + offset;
        // Gap between ln sinh and r + ln eps at r_plus, written to avoid cancellation.
        const double gap = std::log1p((1.0 - 2.0 * eps) * -std::expm1(-2.0 * offset) / (2.0 * eps));
        v.r_zero = v.r_plus - gap / (1.0 / std::tanh(v.r_plus) - 1.0);
        found = v.r_zero > v.r_minus && v.r_zero < v.r_eps;
        if (!found) offset *= 0.5;
    }
    if (!found) {
        throw Error(ErrorKind::construction,
                    "tangent-line intersection did not land in (r_minus, r_eps): r_zero = " +
                        num(v.r_zero) + ", r_minus = " + num(v.r_minus) + ", r_eps = " + num(v.r_eps));
    }

    const Expr lower = Expr::affine(1.0, 0.0, std::log(eps));
    const double coth_plus = 1.0 / std::tanh(v.r_plus);
    const Expr upper = Expr::affine(coth_plus, v.r_plus, std::log(std::sinh(v.r_plus)));
    v.bend_coef = bend_coefficient(1.0, coth_plus, v.r_minus, v.r_zero, v.r_plus, params.bend_fraction);
    const BendPieces bend = bend_corrections(lower, upper, v.r_minus, v.r_zero, v.r_plus, v.bend_coef);
    if (!(bend.f1.eval(v.r_zero).d1 < bend.f2.eval(v.r_zero).d1)) {
        throw Error(ErrorKind::slope_order, "bend of ln v reverses the slope order at r_zero");
    }
    const std::vector<double> bps{v.r_minus, v.r_zero, v.r_plus};
    const PiecewiseExpr base(bps, {lower, bend.f1, bend.f2, Expr::ln_sinh(1.0)});
    v.bold_log_v = SmoothedFunction(base, make_windows(bps, {v.r_zero}, params));
    check_bend(v.bold_log_v, "v");
    v.log_v = SmoothedFunction(base, make_windows(bps, bps, params));
    return v;
}

HProfile build_h(const EpsilonParams& params) {
    validate(params);
    HProfile h;
    h.params = params;
    const double eps = params.eps;
    h.r_eps = solve_r_epsilon(eps);
    h.rho_eps = 0.5 * (h.r_eps - std::pow(eps, 4));
    h.q0 = std::cosh(0.5 * h.rho_eps);
    h.q1 = 0.5 * std::sinh(0.5 * h.rho_eps);
    h.q2 = std::pow(eps, 6);

    // Zero of q: the root of q2 s^2 + q1 s + q0 nearest to rho. It lies in (-1/eps^2, 0)
    // only for small eps (below about 0.15); verify_profile_invariants reports that.
    const double disc = h.q1 * h.q1 - 4.0 * h.q2 * h.q0;
    if (!(disc > 0.0)) throw Error(ErrorKind::construction, "q has no real zero");
    const double t = -0.5 * (h.q1 + std::sqrt(disc));
    h.z_eps = h.rho_eps + h.q0 / t;
    if (!(h.z_eps < 0.0)) throw Error(ErrorKind::construction, "zero of q is not negative: " + num(h.z_eps));

    // m: q'/q = 3/4 by bisection on (z, rho]; q'/q runs from +inf down to tanh(rho/2)/2.
    auto phi = [&](double r) { return h.dq(r) / h.q(r) - 0.75; };
    double lo = h.z_eps;
    double hi = h.rho_eps;
    if (!(phi(hi) < 0.0)) {
        throw Error(ErrorKind::construction, "q'/q - 3/4 has no sign change on (z, rho]");
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (h.q(mid) > 0.0 && phi(mid) > 0.0) {
            lo = mid;
        } else if (h.q(mid) > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    h.m_eps = std::abs(phi(lo)) < std::abs(phi(hi)) ? lo : hi;
    const double ln_qm = std::log(h.q(h.m_eps));
    if (!(ln_qm > 0.5 * h.m_eps)) {
        throw Error(ErrorKind::construction, "q(m) > e^{m/2} fails, so the tangent lines do not cross below m");
    }
    h.r_star = 3.0 * h.m_eps - 4.0 * ln_qm;
    h.n_eps = h.r_star - 1.0;

    const Expr lower = Expr::affine(0.5, 0.0, 0.0);
    const Expr upper = Expr::affine(0.75, h.m_eps, ln_qm);
    h.bend_coef = bend_coefficient(0.5, 0.75, h.n_eps, h.r_star, h.m_eps, params.bend_fraction);
    const BendPieces bend = bend_corrections(lower, upper, h.n_eps, h.r_star, h.m_eps, h.bend_coef);
    if (!(bend.f1.eval(h.r_star).d1 < bend.f2.eval(h.r_star).d1)) {
        throw Error(ErrorKind::slope_order, "bend of ln h reverses the slope order");
    }
    const std::vector<double> bps{h.n_eps, h.r_star, h.m_eps, h.rho_eps};
    const PiecewiseExpr base(bps, {lower, bend.f1, bend.f2,
                                   Expr::ln_quadratic(h.q0, h.q1, h.q2, h.rho_eps),
                                   Expr::ln_cosh(0.5)});
    h.bold_log_h = SmoothedFunction(base, make_windows(bps, {h.r_star}, params));
    check_bend(h.bold_log_h, "h");
    h.log_h = SmoothedFunction(base, make_windows(bps, bps, params));
    return h;
}

GProfile build_g(const EpsilonParams& params, const HProfile& h) {
    validate(params);
    const EpsilonParams& hp = h.params;
    if (hp.eps != params.eps || hp.sigma != params.sigma || hp.delta != params.delta ||
        hp.bend_fraction != params.bend_fraction) {
        throw Error(ErrorKind::profile_mismatch, "h was built with different parameters");
    }
    GProfile g;
    g.params = params;
    g.h = h;
    g.o_eps = std::log(params.eps) + h.n_eps;
    g.tau_eps = std::exp(g.o_eps);
    g.p_eps = 2.0 * g.o_eps;
    g.r_g = g.p_eps + 4.0 * kLn2;
    if (!(g.r_g > g.p_eps && g.r_g < g.o_eps)) {
        throw Error(ErrorKind::construction, "tangent lines meet outside (p, o): r = " + num(g.r_g));
    }
    if (!(h.n_eps < h.rho_eps)) throw Error(ErrorKind::construction, "n_eps must lie below rho_eps");
    g.handoff = 0.5 * (g.o_eps + h.n_eps);

    const Expr lower = Expr::affine(0.25, g.p_eps, kLn2 + g.o_eps);
    const Expr upper = Expr::affine(0.5, 0.0, 0.0);
    g.bend_coef = bend_coefficient(0.25, 0.5, g.p_eps, g.r_g, g.o_eps, params.bend_fraction);
    const BendPieces bend = bend_corrections(lower, upper, g.p_eps, g.r_g, g.o_eps, g.bend_coef);
    if (!(bend.f1.eval(g.r_g).d1 < bend.f2.eval(g.r_g).d1)) {
        throw Error(ErrorKind::slope_order, "bend of ln g reverses the slope order");
    }
    const std::vector<double> bps{g.p_eps, g.r_g, g.o_eps};
    const PiecewiseExpr base(bps, {Expr::ln_tau_exp(g.tau_eps), bend.f1, bend.f2, upper});
    g.bold_log_g = SmoothedFunction(base, make_windows(bps, {g.r_g}, params));
    check_bend(g.bold_log_g, "g");
    g.log_g = SmoothedFunction(base, make_windows(bps, bps, params));
    return g;
}

Jet exp_jet(const Jet& l) {
    const double e = std::exp(l.v);
    return {e, l.d1 * e, (l.d2 + l.d1 * l.d1) * e};
}

Jet log_eval(const VProfile& p, double r) { return p.log_v.eval(r); }
Jet log_eval(const HProfile& p, double r) { return p.log_h.eval(r); }
Jet log_eval(const GProfile& p, double r) {
    return r >= p.handoff ? p.h.log_h.eval(r) : p.log_g.eval(r);
}
Jet log_eval_bold(const VProfile& p, double r) { return p.bold_log_v.eval(r); }
Jet log_eval_bold(const HProfile& p, double r) { return p.bold_log_h.eval(r); }
Jet log_eval_bold(const GProfile& p, double r) {
    return r >= p.handoff ? p.h.log_h.eval(r) : p.bold_log_g.eval(r);
}

Jet eval_profile(const VProfile& p, double r) { return exp_jet(log_eval(p, r)); }
Jet eval_profile(const HProfile& p, double r) { return exp_jet(log_eval(p, r)); }
Jet eval_profile(const GProfile& p, double r) { return exp_jet(log_eval(p, r)); }

bool ProfileReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.pass; });
}

namespace {

struct Collector {
    ProfileReport report;

    // margin > 0 passes.
    void add(std::string name, double margin, std::string detail = {}) {
        report.checks.push_back({std::move(name), margin > 0.0, margin, std::move(detail)});
    }
    // margin >= 0 passes; for closed-interval and exact statements.
    void add_closed(std::string name, double margin, std::string detail = {}) {
        report.checks.push_back({std::move(name), margin >= 0.0, margin, std::move(detail)});
    }
};

template <class LogEval>
double min_over(const std::vector<double>& grid, LogEval f) {
    double m = std::numeric_limits<double>::infinity();
    for (double r : grid) m = std::min(m, f(r));
    return m;
}

std::vector<double> window_grid(const Window& w, int n) {
    return linspace(w.center - w.sigma, w.center + w.sigma, n);
}

// Positivity and monotonicity of a profile, read off its log jet (value > 0 is
// automatic; reported as the smallest ln-value seen being finite).
template <class P>
void positive_increasing(Collector& col, const P& p, const std::vector<double>& grid) {
    double worst_slope = std::numeric_limits<double>::infinity();
    bool finite = true;
    for (double r : grid) {
        const Jet j = eval_profile(p, r);
        finite = finite && std::isfinite(j.v) && j.v > 0.0;
        worst_slope = std::min(worst_slope, log_eval(p, r).d1);
    }
    col.add("positive", finite ? 1.0 : -1.0);
    col.add("increasing", worst_slope, "min (ln f)' on grid");
}

// sup over windows of the C1 deviation between the profile and its bent base,
// relative to the size of the base's log-slope.
template <class P>
void c1_closeness(Collector& col, const P& p, const std::vector<Window>& windows, const GridSpec& grid) {
    double worst = 0.0;
    for (const Window& w : windows) {
        double dv = 0.0;
        double ds = 0.0;
        double scale = 0.0;
        for (double r : window_grid(w, grid.points_per_window)) {
            const Jet a = log_eval(p, r);
            const Jet b = log_eval_bold(p, r);
            dv = std::max(dv, std::abs(a.v - b.v));
            ds = std::max(ds, std::abs(a.d1 - b.d1));
            scale = std::max(scale, std::abs(b.d1));
        }
        worst = std::max({worst, dv, ds / std::max(scale, 1e-300)});
    }
    col.add("c1_closeness", grid.c1_tolerance - worst,
            "max relative deviation " + num(worst) + " vs tolerance " + num(grid.c1_tolerance));
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Profiles are evaluated as exp(ln f), so "exact" agreement means agreement up to the
// rounding of ln f: a few ulps of |ln f| in relative terms.
double log_rounding(double value) {
    return 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(std::log(value)));
}

// Rounding of a slope evaluated at r, where the affine arguments r - a lose |r| ulps.
double slope_rounding(double r) {
    return 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(r));
}

// Worst of rel_diff - log_rounding over a grid; <= 0 means exact agreement.
template <class A, class B>
double exact_excess(const std::vector<double>& grid, A actual, B expected, double* worst_rel) {
    double excess = -std::numeric_limits<double>::infinity();
    double rel = 0.0;
    for (double r : grid) {
        const double e = expected(r);
        const double d = rel_diff(actual(r), e);
        rel = std::max(rel, d);
        excess = std::max(excess, d - log_rounding(e));
    }
    *worst_rel = rel;
    return excess;
}

}  // namespace

ProfileReport verify_profile_invariants(const VProfile& p, const GridSpec& grid) {
    Collector col;
    col.report.profile = "v";
    const double eps = p.params.eps;
    const double e4 = std::pow(eps, 4);
    const double sigma = p.params.sigma;
    col.add_closed("r_eps_root", 1e-12 - rel_diff(std::sinh(p.r_eps), eps * std::exp(p.r_eps)));
    col.report.checks.push_back({"r_plus_range", p.r_plus > p.r_eps && p.r_plus <= p.r_eps + e4,
                                 std::min(p.r_plus - p.r_eps, p.r_eps + e4 - p.r_plus), ""});
    col.add("r_zero_range", std::min(p.r_zero - p.r_minus, p.r_eps - p.r_zero));

    auto value = [&](double r) { return eval_profile(p, r).v; };
    double rel = 0.0;
    double ex = exact_excess(linspace(p.r_minus - sigma - 2.0, p.r_minus - sigma, grid.points_per_segment),
                             value, [&](double r) { return eps * std::exp(r); }, &rel);
    col.add_closed("tail_eps_exp", -ex, "max relative deviation " + num(rel));
    ex = exact_excess(linspace(p.r_plus + sigma, p.r_plus + sigma + 5.0, grid.points_per_segment), value,
                      [](double r) { return std::sinh(r); }, &rel);
    col.add_closed("tail_sinh", -ex, "max relative deviation " + num(rel));

    std::vector<double> all = linspace(p.r_minus - 1.0, p.r_plus + 1.0, grid.points_per_segment);
    for (const Window& w : p.log_v.windows()) {
        const auto wg = window_grid(w, grid.points_per_window);
        all.insert(all.end(), wg.begin(), wg.end());
    }
    positive_increasing(col, p, all);

    double ratio = std::numeric_limits<double>::infinity();
    for (const Window& w : p.log_v.windows()) {
        ratio = std::min(ratio, min_over(window_grid(w, grid.points_per_window), [&](double r) {
                             const Jet l = log_eval(p, r);
                             return l.d2 + l.d1 * l.d1;
                         }));
    }
    col.add("window_v2_over_v", ratio - 0.25, "min v''/v on windows " + num(ratio));

    // Bent base on [r_minus, r_plus]: (ln v)'' > 0 inside, v'' >= v including endpoints.
    std::vector<double> inner = linspace(p.r_minus, p.r_plus, grid.points_per_segment);
    const auto bw = window_grid(p.bold_log_v.windows()[0], grid.points_per_window);
    inner.insert(inner.end(), bw.begin(), bw.end());
    std::vector<double> open;
    for (double r : inner) {
        if (r > p.r_minus && r < p.r_plus) open.push_back(r);
    }
    col.add("base_log_convex", min_over(open, [&](double r) { return log_eval_bold(p, r).d2; }));
    // One-sided values at the endpoints come from the bent pieces themselves.
    const auto& segs = p.bold_log_v.base().segments();
    auto one_sided = [&](const Jet& l) { return l.d2 + l.d1 * l.d1 - 1.0; };
    double vv = std::min(one_sided(segs[1].eval(p.r_minus)), one_sided(segs[2].eval(p.r_plus)));
    vv = std::min(vv, min_over(open, [&](double r) { return one_sided(log_eval_bold(p, r)); }));
    col.add_closed("base_v2_ge_v", vv + 1e-12, "min v''/v - 1 " + num(vv));

    std::vector<Window> outer;
    for (const Window& w : p.log_v.windows()) {
        if (w.center != p.r_zero) outer.push_back(w);
    }
    c1_closeness(col, p, outer, grid);
    return col.report;
}

ProfileReport verify_profile_invariants(const HProfile& p, const GridSpec& grid) {
    Collector col;
    col.report.profile = "h";
    const double eps = p.params.eps;
    const double e6 = std::pow(eps, 6);
    const double sigma = p.params.sigma;
    col.add_closed("q_is_tangent_plus_quadratic",
                   -std::max({std::abs(p.q0 - std::cosh(0.5 * p.rho_eps)),
                              std::abs(p.q1 - 0.5 * std::sinh(0.5 * p.rho_eps)), std::abs(p.q2 - e6)}));
    col.add_closed("q_slope_at_m", 1e-12 - std::abs(p.dq(p.m_eps) / p.q(p.m_eps) - 0.75));
    col.add("q_m_exceeds_exp", std::log(p.q(p.m_eps)) - 0.5 * p.m_eps, "ln q(m) - m/2");
    col.add("z_range", std::min(p.z_eps + 1.0 / (eps * eps), -p.z_eps));
    col.add("ordering", std::min({p.r_star - p.n_eps, p.m_eps - p.r_star, p.rho_eps - p.m_eps}));

    auto value = [&](double r) { return eval_profile(p, r).v; };
    double rel = 0.0;
    double ex = exact_excess(linspace(p.rho_eps + sigma, p.rho_eps + sigma + 5.0, grid.points_per_segment),
                             value, [](double r) { return std::cosh(0.5 * r); }, &rel);
    col.add_closed("tail_cosh", -ex, "max relative deviation " + num(rel));
    const auto low_tail = linspace(p.n_eps - sigma - 5.0, p.n_eps - sigma, grid.points_per_segment);
    ex = exact_excess(low_tail, value, [](double r) { return std::exp(0.5 * r); }, &rel);
    col.add_closed("tail_exp_half", -ex, "max relative deviation " + num(rel));
    double slope = 0.0;
    for (double r : low_tail) slope = std::max(slope, std::abs(log_eval(p, r).d1 - 0.5));
    col.add_closed("tail_log_slope_half", -slope);
    ex = exact_excess(linspace(p.m_eps + sigma, p.rho_eps - sigma, grid.points_per_segment), value,
                      [&](double r) { return p.q(r); }, &rel);
    col.add_closed("equals_q", -ex, "max relative deviation " + num(rel));

    // Bent base on [n, m].
    std::vector<double> nm = linspace(p.n_eps, p.m_eps, grid.points_per_segment);
    const auto bw = window_grid(p.bold_log_h.windows()[0], grid.points_per_window);
    nm.insert(nm.end(), bw.begin(), bw.end());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double convex = lo;
    double quarter = lo;
    for (double r : nm) {
        const Jet l = log_eval_bold(p, r);
        lo = std::min(lo, l.d1);
        hi = std::max(hi, l.d1);
        if (r >= p.m_eps) continue;  // m itself is read from the left piece below
        if (r > p.n_eps) convex = std::min(convex, l.d2);
        quarter = std::min(quarter, l.d2 + l.d1 * l.d1 - 0.25);
    }
    const Jet at_m = p.bold_log_h.base().eval_left(p.m_eps);
    quarter = std::min(quarter, at_m.d2 + at_m.d1 * at_m.d1 - 0.25);
    col.add_closed("base_slope_range", std::min(lo - 0.5, 0.75 - hi) + slope_rounding(p.n_eps),
                   "h'/h in [" + num(lo) + ", " + num(hi) + "]");
    col.add("base_log_convex", convex);
    col.add_closed("base_h2_gt_h_over_4", quarter + 1e-15);

    std::vector<double> all = linspace(p.n_eps - 2.0, p.rho_eps + 2.0, grid.points_per_segment);
    for (const Window& w : p.log_h.windows()) {
        const auto wg = window_grid(w, grid.points_per_window);
        all.insert(all.end(), wg.begin(), wg.end());
    }
    positive_increasing(col, p, all);

    auto h2h = [&](double r) {
        const Jet l = log_eval(p, r);
        return l.d2 + l.d1 * l.d1;
    };
    double near_mrho = std::numeric_limits<double>::infinity();
    double near_n = near_mrho;
    for (const Window& w : p.log_h.windows()) {
        const double m = min_over(window_grid(w, grid.points_per_window), h2h);
        if (w.center == p.n_eps) near_n = std::min(near_n, m);
        if (w.center == p.m_eps || w.center == p.rho_eps) near_mrho = std::min(near_mrho, m);
    }
    col.add("window_h2_over_h_m_rho", near_mrho - e6, "min h''/h " + num(near_mrho));
    col.add("window_h2_over_h_n", near_n - 1.0 / 9.0, "min h''/h " + num(near_n));

    std::vector<Window> outer;
    for (const Window& w : p.log_h.windows()) {
        if (w.center != p.r_star) outer.push_back(w);
    }
    c1_closeness(col, p, outer, grid);
    return col.report;
}

ProfileReport verify_profile_invariants(const GProfile& p, const GridSpec& grid) {
    Collector col;
    col.report.profile = "g";
    const double eps = p.params.eps;
    const double sigma = p.params.sigma;
    col.add("tau_range", std::min(p.tau_eps, 2.0 * eps - p.tau_eps));
    col.add_closed("F_at_p_quarter", 1e-15 - std::abs(p.F(p.p_eps) - 0.25));

    double d = 0.0;
    for (double r : linspace(p.o_eps + sigma, p.h.n_eps + 1.0, grid.points_per_segment)) {
        const Jet a = log_eval(p, r);
        const Jet b = log_eval(p.h, r);
        d = std::max({d, std::abs(a.v - b.v), std::abs(a.d1 - b.d1), std::abs(a.d2 - b.d2)});
    }
    col.add_closed("equals_h_above_o", -d);
    const auto tail = linspace(p.p_eps - sigma - 50.0, p.p_eps - sigma, grid.points_per_segment);
    double rel = 0.0;
    const double ex = exact_excess(tail, [&](double r) { return eval_profile(p, r).v; },
                                   [&](double r) { return p.tau_eps + std::exp(0.5 * r); }, &rel);
    col.add_closed("tail_tau_plus_exp", -ex, "max relative deviation " + num(rel));
    double slope = 0.0;
    for (double r : tail) slope = std::max(slope, std::abs(log_eval(p, r).d1 - p.F(r)));
    col.add_closed("tail_log_slope_F", 1e-15 - slope);

    std::vector<double> po = linspace(p.p_eps, p.o_eps, grid.points_per_segment);
    const auto bw = window_grid(p.bold_log_g.windows()[0], grid.points_per_window);
    po.insert(po.end(), bw.begin(), bw.end());
    std::sort(po.begin(), po.end());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double mono = lo;
    double conv = lo;
    double prev = -lo;
    for (double r : po) {
        const Jet l = log_eval_bold(p, r);
        lo = std::min(lo, l.d1);
        hi = std::max(hi, l.d1);
        mono = std::min(mono, l.d1 - prev);
        prev = l.d1;
        // g''/g - (g'/g)^2 = (ln g)'' and (g'/g)^2 >= 1/16.
        if (r > p.p_eps && r < p.o_eps) conv = std::min(conv, l.d2);
    }
    const double tol = slope_rounding(p.p_eps);
    col.add_closed("base_slope_range", std::min(lo - 0.25, 0.5 - hi) + tol,
                   "g'/g in [" + num(lo) + ", " + num(hi) + "]");
    col.add_closed("base_slope_increasing", mono + tol);
    col.add("base_g2_gt_slope_sq", conv);

    std::vector<double> all = linspace(p.p_eps - 5.0, p.o_eps + 5.0, grid.points_per_segment);
    double window_min = std::numeric_limits<double>::infinity();
    for (const Window& w : p.log_g.windows()) {
        const auto wg = window_grid(w, grid.points_per_window);
        all.insert(all.end(), wg.begin(), wg.end());
    }
    // sigma-neighbourhood of [p, o]: windows plus a segment grid.
    std::vector<double> nb = linspace(p.p_eps - sigma, p.o_eps + sigma, grid.points_per_segment);
    for (const Window& w : p.log_g.windows()) {
        const auto wg = window_grid(w, grid.points_per_window);
        nb.insert(nb.end(), wg.begin(), wg.end());
    }
    window_min = min_over(nb, [&](double r) {
        const Jet l = log_eval(p, r);
        return l.d2 + l.d1 * l.d1;
    });
    col.add("g2_over_g_near_po", window_min - 1.0 / 25.0, "min g''/g " + num(window_min));
    positive_increasing(col, p, all);

    std::vector<Window> outer;
    for (const Window& w : p.log_g.windows()) {
        if (w.center != p.r_g) outer.push_back(w);
    }
    c1_closeness(col, p, outer, grid);
    return col.report;
}

}  // namespace warpcurv
