#pragma once

#include <memory>
#include <string>
#include <vector>

namespace warpcurv {

/// Value with first and second derivative.
struct Jet {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Closed catalog of analytic expressions in one variable r.
class Expr {
public:
    enum class Kind {
        affine,        // slope * (r - anchor) + value
        quadratic,     // coef * (r - center)^2
        ln_sinh,       // ln sinh(a r)
        ln_cosh,       // ln cosh(a r)
        ln_quadratic,  // ln(q0 + q1 (r - center) + q2 (r - center)^2)
        ln_tau_exp,    // ln(tau + e^{r/2})
        exp,           // e^{child}
        sum,           // sum of children
        scale,         // s * child
    };

    [[nodiscard]] static Expr affine(double slope, double anchor, double value);
    [[nodiscard]] static Expr quadratic(double coef, double center);
    [[nodiscard]] static Expr ln_sinh(double a);
    [[nodiscard]] static Expr ln_cosh(double a);
    [[nodiscard]] static Expr ln_quadratic(double q0, double q1, double q2, double center);
    [[nodiscard]] static Expr ln_tau_exp(double tau);
    [[nodiscard]] static Expr exp(const Expr& child);
    [[nodiscard]] static Expr sum(std::vector<Expr> children);
    [[nodiscard]] static Expr scale(double s, const Expr& child);

    [[nodiscard]] Jet eval(double r) const;
    /// value(r0 + dr) - value(r0), computed without cancellation against value(r0).
    [[nodiscard]] double delta(double r0, double dr) const;
    /// Lower and upper end of the natural domain (open interval).
    [[nodiscard]] double domain_lo() const;
    [[nodiscard]] double domain_hi() const;

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] const std::vector<double>& params() const { return params_; }
    [[nodiscard]] const std::vector<Expr>& children() const { return *children_; }

private:
    Expr(Kind k, std::vector<double> p, std::vector<Expr> c = {});

    Kind kind_ = Kind::affine;
    std::vector<double> params_;
    std::shared_ptr<const std::vector<Expr>> children_;
};

[[nodiscard]] Expr operator+(const Expr& a, const Expr& b);

/// Piecewise analytic function. Segment i lives on [b_{i-1}, b_i] with
/// b_{-1} = lo and b_m = hi; evaluation at a breakpoint uses the right segment.
class PiecewiseExpr {
public:
    PiecewiseExpr() = default;
    explicit PiecewiseExpr(Expr single, double lo = -1e300, double hi = 1e300);
    PiecewiseExpr(std::vector<double> breakpoints, std::vector<Expr> segments,
                  double lo = -1e300, double hi = 1e300);

    [[nodiscard]] Jet eval(double r) const;
    [[nodiscard]] Jet eval_left(double r) const;
    [[nodiscard]] Jet eval_right(double r) const { return eval(r); }
    [[nodiscard]] std::size_t segment_index(double r) const;
    [[nodiscard]] Jet eval_segment(std::size_t i, double r) const { return segments_[i].eval(r); }

    [[nodiscard]] const std::vector<double>& breakpoints() const { return breakpoints_; }
    [[nodiscard]] const std::vector<Expr>& segments() const { return segments_; }
    [[nodiscard]] double lo() const { return lo_; }
    [[nodiscard]] double hi() const { return hi_; }

private:
    std::vector<double> breakpoints_;
    std::vector<Expr> segments_;
    double lo_ = -1e300;
    double hi_ = 1e300;
};

/// Plateau bump: 1 on [-1/2, 1/2], 0 outside (-1, 1), smooth step between.
[[nodiscard]] Jet bump(double t);
/// Integral of the bump over the real line.
inline constexpr double bump_mass = 1.5;
/// Normalized kernel theta_delta(y) = bump(y / delta) / (bump_mass * delta).
[[nodiscard]] double theta(double y, double delta);
/// (theta_delta * theta_delta)(w), from a precomputed piecewise Chebyshev table.
[[nodiscard]] double theta2(double w, double delta);
/// Same quantity for delta = 1 by direct quadrature; slow, used to audit the table.
[[nodiscard]] double theta2_reference(double w);

struct MollifierSpec {
    double delta = 1e-3;
    int quadrature_order = 64;
};

/// Convolution of f^(deriv_order) with theta_delta, applied `passes` times.
[[nodiscard]] double mollify(const PiecewiseExpr& f, const MollifierSpec& spec, int passes,
                             int deriv_order, double x);

/// All three derivative orders at once, and the order-doubling error estimate.
struct MollifyResult {
    Jet value;
    Jet error_estimate;
};
[[nodiscard]] MollifyResult mollify_checked(const PiecewiseExpr& f, const MollifierSpec& spec,
                                            int passes, double x);

struct Window {
    double center = 0.0;
    double delta = 0.0;
    double sigma = 0.0;
};

/// Base function with disjoint smoothing windows; equals base outside them.
class SmoothedFunction {
public:
    SmoothedFunction() = default;
    SmoothedFunction(PiecewiseExpr base, std::vector<Window> windows, int quadrature_order = 64);

    [[nodiscard]] Jet eval(double x) const;
    [[nodiscard]] Jet eval_base(double x) const { return base_.eval(x); }
    /// Index of the window whose closed sigma-interval contains x, or -1.
    [[nodiscard]] int window_at(double x) const;

    [[nodiscard]] const PiecewiseExpr& base() const { return base_; }
    [[nodiscard]] const std::vector<Window>& windows() const { return windows_; }
    [[nodiscard]] int quadrature_order() const { return order_; }

private:
    PiecewiseExpr base_;
    std::vector<Window> windows_;
    int order_ = 64;
};

[[nodiscard]] SmoothedFunction smooth_at(const PiecewiseExpr& f, double c, double delta,
                                         double sigma);
/// Adds one more window to an already smoothed function.
[[nodiscard]] SmoothedFunction smooth_at(const SmoothedFunction& f, double c, double delta,
                                         double sigma);

/// Quadratic corrections F1 = f1 + delta (r - a1)^2 and
/// F2 = f2 + delta (r - a2)^2 (c - a1)^2 / (c - a2)^2, spliced at c.
struct BendPieces {
    Expr f1;
    Expr f2;
};
[[nodiscard]] BendPieces bend_corrections(const Expr& f1, const Expr& f2, double a1, double c,
                                          double a2, double delta);

[[nodiscard]] SmoothedFunction bend_splice(const Expr& f1, const Expr& f2, double a1, double c,
                                           double a2, double delta, double sigma, double k);

[[nodiscard]] bool check_splice_convexity(const PiecewiseExpr& f1, const PiecewiseExpr& f2,
                                          double c);

struct ProbeRow {
    double delta = 0.0;
    double sup_value = 0.0;
    double sup_slope = 0.0;
};
[[nodiscard]] std::vector<ProbeRow> c1_convergence_probe(const PiecewiseExpr& f, double c,
                                                         double sigma,
                                                         const std::vector<double>& deltas,
                                                         int grid_points = 1000);

/// Smallest f'' - k over an n-point grid of the window [c - sigma, c + sigma].
[[nodiscard]] double min_second_derivative_margin(const SmoothedFunction& f,
                                                  std::size_t window, double k, int n = 1000);

}  // namespace warpcurv
