#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "warpcurv/convex_toolkit.hpp"
#include "warpcurv/error.hpp"
#include "warpcurv/quadrature.hpp"

namespace warpcurv {

Jet bump(double t) {
    const double a = std::abs(t);
    if (a <= 0.5) return {1.0, 0.0, 0.0};
    if (a >= 1.0) return {0.0, 0.0, 0.0};
    // s runs from 1 at |t| = 1/2 to 0 at |t| = 1; S is the exp(-1/x) smooth step.
    const double s = 2.0 * (1.0 - a);
    const double u = 1.0 - s;
    if (s < 2e-3) return {0.0, 0.0, 0.0};
    if (u < 2e-3) return {1.0, 0.0, 0.0};
    const double g = 1.0 / s - 1.0 / u;
    const double S = 1.0 / (1.0 + std::exp(g));
    const double Sc = 1.0 / (1.0 + std::exp(-g));
    const double g1 = -1.0 / (s * s) - 1.0 / (u * u);
    const double g2 = 2.0 / (s * s * s) - 2.0 / (u * u * u);
    const double S1 = -S * Sc * g1;
    const double S2 = -S1 * (Sc - S) * g1 - S * Sc * g2;
    const double ds_dt = t > 0.0 ? -2.0 : 2.0;
    return {S, S1 * ds_dt, S2 * 4.0};
}

double theta(double y, double delta) {
    return bump(y / delta).v / (bump_mass * delta);
}

namespace {

// theta_1 * theta_1 at w by direct quadrature, split where either factor is not analytic.
double theta2_direct(double w) {
    const double lo = std::max(-1.0, w - 1.0);
    const double hi = std::min(1.0, w + 1.0);
    if (!(hi > lo)) return 0.0;
    std::vector<double> pts{lo, hi};
    for (double p : {-0.5, 0.5, w - 0.5, w + 0.5}) {
        if (p > lo && p < hi) pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end());
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        sum += integrate([w](double y) { return theta(y, 1.0) * theta(w - y, 1.0); }, pts[k],
                         pts[k + 1], 128);
    }
    return sum;
}

// Piecewise Chebyshev table of theta_1 * theta_1 on [0, 2] (it is even).
class Theta2Table {
public:
    static constexpr int panels = 1024;
    static constexpr int degree = 16;

    Theta2Table() : coef_(static_cast<std::size_t>(panels) * (degree + 1)) {
        constexpr double width = 2.0 / panels;
        constexpr int m = degree + 1;
        std::vector<double> values(m);
        for (int p = 0; p < panels; ++p) {
            const double a = p * width;
            for (int j = 0; j < m; ++j) {
                const double t = std::cos(std::numbers::pi * (j + 0.5) / m);
                values[j] = theta2_direct(a + 0.5 * width * (t + 1.0));
            }
            for (int k = 0; k < m; ++k) {
                double c = 0.0;
                for (int j = 0; j < m; ++j) {
                    c += values[j] * std::cos(std::numbers::pi * k * (j + 0.5) / m);
                }
                coef_[static_cast<std::size_t>(p) * m + k] = (k == 0 ? 1.0 : 2.0) * c / m;
            }
        }
    }

    [[nodiscard]] double operator()(double w) const {
        const double a = std::abs(w);
        if (a >= 2.0) return 0.0;
        constexpr double width = 2.0 / panels;
        int p = static_cast<int>(a / width);
        if (p >= panels) p = panels - 1;
        const double t = 2.0 * (a - p * width) / width - 1.0;
        const double* c = &coef_[static_cast<std::size_t>(p) * (degree + 1)];
        double b1 = 0.0;
        double b2 = 0.0;
        for (int k = degree; k >= 1; --k) {
            const double b0 = 2.0 * t * b1 - b2 + c[k];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + c[0];
    }

private:
    std::vector<double> coef_;
};

// f(ref + d) - f(ref), walking across breakpoints and treating f as continuous.
double piecewise_delta(const PiecewiseExpr& f, double ref, double d) {
    if (d == 0.0) return 0.0;
    const auto& bps = f.breakpoints();
    const auto& segs = f.segments();
    double acc = 0.0;
    double pos = 0.0;
    if (d > 0.0) {
        std::size_t i = f.segment_index(ref);
        while (i < bps.size() && bps[i] - ref < d) {
            const double bl = bps[i] - ref;
            acc += segs[i].delta(ref + pos, bl - pos);
            pos = bl;
            ++i;
        }
        acc += segs[i].delta(ref + pos, d - pos);
    } else {
        auto i = static_cast<std::size_t>(
            std::lower_bound(bps.begin(), bps.end(), ref) - bps.begin());
        while (i > 0 && bps[i - 1] - ref > d) {
            const double bl = bps[i - 1] - ref;
            acc += segs[i].delta(ref + pos, bl - pos);
            pos = bl;
            --i;
        }
        acc += segs[i].delta(ref + pos, d - pos);
    }
    return acc;
}

struct Conv {
    const PiecewiseExpr& f;
    double ref;
    double delta;
    int order;
    std::vector<double> rel_breaks;  // breakpoints minus ref, near the support
    std::vector<double> slope_jumps;  // f'(b+) - f'(b-), the point masses of f''

    Conv(const PiecewiseExpr& fn, double r, double d, int n, double reach)
        : f(fn), ref(r), delta(d), order(n) {
        const auto& bps = f.breakpoints();
        for (std::size_t i = 0; i < bps.size(); ++i) {
            const double bl = bps[i] - ref;
            if (std::abs(bl) <= reach) {
                rel_breaks.push_back(bl);
                slope_jumps.push_back(f.segments()[i + 1].eval(bps[i]).d1 -
                                      f.segments()[i].eval(bps[i]).d1);
            }
        }
    }

    static void add_split(std::vector<double>& pts, double p, double lo, double hi) {
        if (p > lo && p < hi) pts.push_back(p);
    }

    std::vector<double> kernel_splits() const {
        return {-delta, -0.5 * delta, 0.5 * delta, delta};
    }

    // Integral over z of g(sl - z) theta(z), with g = (f - f(ref), f', f'').
    Jet once(double sl) const {
        std::vector<double> pts = kernel_splits();
        for (double bl : rel_breaks) add_split(pts, sl - bl, -delta, delta);
        std::sort(pts.begin(), pts.end());
        const GaussLegendre& gl = gauss_legendre(order);
        Jet out;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            const double z0 = pts[k];
            const double z1 = pts[k + 1];
            if (!(z1 - z0 > 1e-15 * delta)) continue;
            const double half = 0.5 * (z1 - z0);
            const double mid = 0.5 * (z0 + z1);
            const std::size_t seg = f.segment_index(ref + (sl - mid));
            const Expr& e = f.segments()[seg];
            Jet part;
            for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                const double z = mid + half * gl.nodes[i];
                const double w = gl.weights[i] * theta(z, delta);
                if (w == 0.0) continue;
                const double d = sl - z;
                const Jet j = e.eval(ref + d);
                part.v += w * piecewise_delta(f, ref, d);
                part.d1 += w * j.d1;
                part.d2 += w * j.d2;
            }
            out.v += half * part.v;
            out.d1 += half * part.d1;
            out.d2 += half * part.d2;
        }
        for (std::size_t k = 0; k < rel_breaks.size(); ++k) {
            out.d2 += slope_jumps[k] * theta(sl - rel_breaks[k], delta);
        }
        return out;
    }

    // Two passes as one convolution against theta * theta.
    Jet twice(double sl) const {
        std::vector<double> pts;
        for (int k = -4; k <= 4; ++k) pts.push_back(0.5 * k * delta);
        for (double bl : rel_breaks) add_split(pts, sl - bl, -2.0 * delta, 2.0 * delta);
        std::sort(pts.begin(), pts.end());
        const GaussLegendre& gl = gauss_legendre(order);
        Jet out;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            const double w0 = pts[k];
            const double w1 = pts[k + 1];
            if (!(w1 - w0 > 1e-15 * delta)) continue;
            const double half = 0.5 * (w1 - w0);
            const double mid = 0.5 * (w0 + w1);
            const std::size_t seg = f.segment_index(ref + (sl - mid));
            const Expr& e = f.segments()[seg];
            Jet part;
            for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                const double w = mid + half * gl.nodes[i];
                const double kw = gl.weights[i] * theta2(w, delta);
                if (kw == 0.0) continue;
                const double d = sl - w;
                const Jet j = e.eval(ref + d);
                part.v += kw * piecewise_delta(f, ref, d);
                part.d1 += kw * j.d1;
                part.d2 += kw * j.d2;
            }
            out.v += half * part.v;
            out.d1 += half * part.d1;
            out.d2 += half * part.d2;
        }
        for (std::size_t k = 0; k < rel_breaks.size(); ++k) {
            out.d2 += slope_jumps[k] * theta2(sl - rel_breaks[k], delta);
        }
        return out;
    }

    Jet run(int passes, double sl) const { return passes == 1 ? once(sl) : twice(sl); }
};

}  // namespace

double theta2(double w, double delta) {
    static const Theta2Table table;
    return table(w / delta) / delta;
}

double theta2_reference(double w) { return theta2_direct(w); }

namespace {

void check_support(const PiecewiseExpr& f, double a, double b) {
    if (a < f.lo() || b > f.hi()) {
        throw Error(ErrorKind::domain, "mollifier support [" + std::to_string(a) + ", " +
                                           std::to_string(b) + "] leaves the function domain");
    }
    const auto& bps = f.breakpoints();
    const auto& segs = f.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const double s0 = std::max(a, i == 0 ? f.lo() : bps[i - 1]);
        const double s1 = std::min(b, i == bps.size() ? f.hi() : bps[i]);
        if (s0 >= s1) continue;
        if (!(segs[i].domain_lo() < s0 && segs[i].domain_hi() > s1)) {
            throw Error(ErrorKind::domain, "mollifier support leaves the domain of a segment");
        }
    }
}

void check_mollify_args(const MollifierSpec& spec, int passes) {
    if (!(spec.delta > 0.0)) throw Error(ErrorKind::parameter, "mollifier delta must be positive");
    if (passes != 1 && passes != 2) throw Error(ErrorKind::parameter, "passes must be 1 or 2");
    if (spec.quadrature_order < 2) throw Error(ErrorKind::parameter, "quadrature order too small");
}

}  // namespace

MollifyResult mollify_checked(const PiecewiseExpr& f, const MollifierSpec& spec, int passes,
                              double x) {
    check_mollify_args(spec, passes);
    const double reach = passes * spec.delta;
    check_support(f, x - reach, x + reach);
    const Conv lo(f, x, spec.delta, spec.quadrature_order, reach);
    const Conv hi(f, x, spec.delta, 2 * spec.quadrature_order, reach);
    Jet a = lo.run(passes, 0.0);
    const Jet b = hi.run(passes, 0.0);
    MollifyResult out;
    out.error_estimate = {std::abs(a.v - b.v), std::abs(a.d1 - b.d1), std::abs(a.d2 - b.d2)};
    a.v += f.eval(x).v;
    out.value = a;
    return out;
}

double mollify(const PiecewiseExpr& f, const MollifierSpec& spec, int passes, int deriv_order,
               double x) {
    check_mollify_args(spec, passes);
    if (deriv_order < 0 || deriv_order > 2) {
        throw Error(ErrorKind::parameter, "derivative order must be 0, 1 or 2");
    }
    const double reach = passes * spec.delta;
    check_support(f, x - reach, x + reach);
    const Conv conv(f, x, spec.delta, spec.quadrature_order, reach);
    const Jet j = conv.run(passes, 0.0);
    if (deriv_order == 0) return f.eval(x).v + j.v;
    return deriv_order == 1 ? j.d1 : j.d2;
}

SmoothedFunction::SmoothedFunction(PiecewiseExpr base, std::vector<Window> windows,
                                   int quadrature_order)
    : base_(std::move(base)), windows_(std::move(windows)), order_(quadrature_order) {
    std::sort(windows_.begin(), windows_.end(),
              [](const Window& a, const Window& b) { return a.center < b.center; });
    for (std::size_t j = 0; j < windows_.size(); ++j) {
        const Window& w = windows_[j];
        if (!(w.delta > 0.0) || !(w.sigma > 0.0)) {
            throw Error(ErrorKind::parameter, "window delta and sigma must be positive");
        }
        if (!(w.delta < 0.25 * w.sigma)) {
            throw Error(ErrorKind::parameter, "window needs delta < sigma / 4");
        }
        if (j > 0 && !(windows_[j - 1].center + windows_[j - 1].sigma < w.center - w.sigma)) {
            throw Error(ErrorKind::parameter, "smoothing windows overlap");
        }
        const double reach = w.sigma + 2.0 * w.delta;
        for (double b : base_.breakpoints()) {
            if (b != w.center && std::abs(b - w.center) <= reach) {
                throw Error(ErrorKind::parameter,
                            "another breakpoint lies inside the window at " + std::to_string(w.center));
            }
        }
        check_support(base_, w.center - reach, w.center + reach);
        const Jet left = base_.eval_left(w.center);
        const Jet right = base_.eval(w.center);
        if (left.d1 > right.d1 + 1e-10 * std::max(1.0, std::abs(right.d1))) {
            throw Error(ErrorKind::convexity_violation,
                        "left slope exceeds right slope at " + std::to_string(w.center));
        }
    }
}

int SmoothedFunction::window_at(double x) const {
    auto it = std::lower_bound(windows_.begin(), windows_.end(), x,
                               [](const Window& w, double v) { return w.center + w.sigma <= v; });
    if (it == windows_.end()) return -1;
    if (std::abs(x - it->center) < it->sigma) return static_cast<int>(it - windows_.begin());
    return -1;
}

Jet SmoothedFunction::eval(double x) const {
    const int j = window_at(x);
    if (j < 0) return base_.eval(x);
    const Window& w = windows_[static_cast<std::size_t>(j)];
    const double xl = x - w.center;
    const Conv conv(base_, w.center, w.delta, order_, 2.0 * w.delta);
    const Jet F = conv.twice(xl);
    const double fref = base_.eval(w.center).v;
    const double fdel = piecewise_delta(base_, w.center, xl);
    const Jet fx = base_.eval(x);
    const Jet phi = bump(-xl / w.sigma);
    const double p = phi.v;
    const double dp = -phi.d1 / w.sigma;
    const double ddp = phi.d2 / (w.sigma * w.sigma);
    const double e0 = F.v - fdel;
    const double e1 = F.d1 - fx.d1;
    const double e2 = F.d2 - fx.d2;
    Jet out;
    out.v = fref + fdel + e0 * p;
    out.d1 = fx.d1 + e1 * p + e0 * dp;
    out.d2 = fx.d2 + e2 * p + 2.0 * e1 * dp + e0 * ddp;
    return out;
}

SmoothedFunction smooth_at(const PiecewiseExpr& f, double c, double delta, double sigma) {
    return SmoothedFunction(f, {Window{c, delta, sigma}});
}

SmoothedFunction smooth_at(const SmoothedFunction& f, double c, double delta, double sigma) {
    std::vector<Window> windows = f.windows();
    windows.push_back(Window{c, delta, sigma});
    return SmoothedFunction(f.base(), std::move(windows), f.quadrature_order());
}

BendPieces bend_corrections(const Expr& f1, const Expr& f2, double a1, double c, double a2,
                            double delta) {
    const double ratio = (c - a1) / (c - a2);
    return {f1 + Expr::quadratic(delta, a1), f2 + Expr::quadratic(delta * ratio * ratio, a2)};
}

SmoothedFunction bend_splice(const Expr& f1, const Expr& f2, double a1, double c, double a2,
                             double delta, double sigma, double k) {
    if (!(a1 < c && c < a2)) throw Error(ErrorKind::parameter, "bend needs a1 < c < a2");
    const Jet j1 = f1.eval(c);
    const Jet j2 = f2.eval(c);
    if (!(std::abs(j1.v - j2.v) <= 1e-12 * std::max(1.0, std::abs(j2.v)))) {
        throw Error(ErrorKind::continuity, "bend pieces disagree at the splice point");
    }
    if (!(j1.d1 < j2.d1)) {
        throw Error(ErrorKind::slope_order, "bend needs f1'(c) < f2'(c)");
    }
    const BendPieces pieces = bend_corrections(f1, f2, a1, c, a2, delta);
    if (!(pieces.f1.eval(c).d1 < pieces.f2.eval(c).d1)) {
        throw Error(ErrorKind::slope_order, "bend correction reverses the slope order; reduce delta");
    }
    if (!(sigma + 2.0 * delta < std::min(c - a1, a2 - c))) {
        throw Error(ErrorKind::parameter, "bend window does not fit inside [a1, a2]");
    }
    SmoothedFunction out(PiecewiseExpr({c}, {pieces.f1, pieces.f2}), {Window{c, delta, sigma}});
    constexpr int n = 200;
    double worst = 1e300;
    for (int i = 0; i <= n; ++i) {
        const double x = a1 + (a2 - a1) * i / n;
        worst = std::min(worst, out.eval(x).d2 - k);
    }
    worst = std::min(worst, min_second_derivative_margin(out, 0, k, n));
    if (!(worst > 0.0)) {
        throw Error(ErrorKind::construction,
                    "bent function fails f'' > k on the check grid (margin " + std::to_string(worst) + ")");
    }
    return out;
}

bool check_splice_convexity(const PiecewiseExpr& f1, const PiecewiseExpr& f2, double c) {
    const Jet j1 = f1.eval_left(c);
    const Jet j2 = f2.eval(c);
    return std::abs(j1.v - j2.v) <= 1e-12 * std::max(1.0, std::abs(j2.v)) && j1.d1 <= j2.d1;
}

std::vector<ProbeRow> c1_convergence_probe(const PiecewiseExpr& f, double c, double sigma,
                                           const std::vector<double>& deltas, int grid_points) {
    std::vector<ProbeRow> rows;
    for (double d : deltas) {
        if (!(d > 0.0 && d < 0.25 * sigma)) {
            throw Error(ErrorKind::parameter, "inadmissible delta for the window");
        }
        const SmoothedFunction sf = smooth_at(f, c, d, sigma);
        ProbeRow row{d, 0.0, 0.0};
        for (int i = 0; i < grid_points; ++i) {
            const double x = c - sigma + 2.0 * sigma * i / (grid_points - 1);
            const Jet s = sf.eval(x);
            const Jet b = f.eval(x);
            row.sup_value = std::max(row.sup_value, std::abs(s.v - b.v));
            if (x != c) row.sup_slope = std::max(row.sup_slope, std::abs(s.d1 - b.d1));
        }
        rows.push_back(row);
    }
    return rows;
}

double min_second_derivative_margin(const SmoothedFunction& f, std::size_t window, double k,
                                    int n) {
    const Window& w = f.windows().at(window);
    double worst = 1e300;
    for (int i = 0; i < n; ++i) {
        const double x = w.center - w.sigma + 2.0 * w.sigma * i / (n - 1);
        worst = std::min(worst, f.eval(x).d2 - k);
    }
    return worst;
}

}  // namespace warpcurv
