#include <algorithm>
#include <cmath>
#include <limits>

#include "warpcurv/convex_toolkit.hpp"
#include "warpcurv/error.hpp"

namespace warpcurv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;

double log_sinh(double x) {
    if (x > 20.0) return x - kLn2 + std::log1p(-std::exp(-2.0 * x));
    return std::log(std::sinh(x));
}

double log_cosh(double x) {
    const double ax = std::abs(x);
    return ax - kLn2 + std::log1p(std::exp(-2.0 * ax));
}

}  // namespace

Expr::Expr(Kind k, std::vector<double> p, std::vector<Expr> c)
    : kind_(k),
      params_(std::move(p)),
      children_(std::make_shared<const std::vector<Expr>>(std::move(c))) {}

Expr Expr::affine(double slope, double anchor, double value) {
    return Expr(Kind::affine, {slope, anchor, value});
}

Expr Expr::quadratic(double coef, double center) {
    return Expr(Kind::quadratic, {coef, center});
}

Expr Expr::ln_sinh(double a) {
    if (!(a > 0.0)) throw Error(ErrorKind::parameter, "ln_sinh needs a > 0");
    return Expr(Kind::ln_sinh, {a});
}

Expr Expr::ln_cosh(double a) { return Expr(Kind::ln_cosh, {a}); }

Expr Expr::ln_quadratic(double q0, double q1, double q2, double center) {
    if (!(q0 > 0.0)) throw Error(ErrorKind::parameter, "ln_quadratic needs a positive value at its center");
    return Expr(Kind::ln_quadratic, {q0, q1, q2, center});
}

Expr Expr::ln_tau_exp(double tau) {
    if (!(tau > 0.0)) throw Error(ErrorKind::parameter, "ln_tau_exp needs tau > 0");
    return Expr(Kind::ln_tau_exp, {tau, std::log(tau)});
}

Expr Expr::exp(const Expr& child) { return Expr(Kind::exp, {}, {child}); }

Expr Expr::sum(std::vector<Expr> children) {
    if (children.empty()) throw Error(ErrorKind::parameter, "empty sum");
    return Expr(Kind::sum, {}, std::move(children));
}

Expr Expr::scale(double s, const Expr& child) { return Expr(Kind::scale, {s}, {child}); }

Expr operator+(const Expr& a, const Expr& b) {
    std::vector<Expr> terms;
    for (const Expr* e : {&a, &b}) {
        if (e->kind() == Expr::Kind::sum) {
            terms.insert(terms.end(), e->children().begin(), e->children().end());
        } else {
            terms.push_back(*e);
        }
    }
    return Expr::sum(std::move(terms));
}

Jet Expr::eval(double r) const {
    const auto& p = params_;
    switch (kind_) {
        case Kind::affine:
            return {p[2] + p[0] * (r - p[1]), p[0], 0.0};
        case Kind::quadratic: {
            const double s = r - p[1];
            return {p[0] * s * s, 2.0 * p[0] * s, 2.0 * p[0]};
        }
        case Kind::ln_sinh: {
            const double x = p[0] * r;
            const double sh = std::sinh(x);
            return {log_sinh(x), p[0] / std::tanh(x), -p[0] * p[0] / (sh * sh)};
        }
        case Kind::ln_cosh: {
            const double x = p[0] * r;
            const double ch = std::cosh(x);
            return {log_cosh(x), p[0] * std::tanh(x), p[0] * p[0] / (ch * ch)};
        }
        case Kind::ln_quadratic: {
            const double s = r - p[3];
            const double q = p[0] + s * (p[1] + p[2] * s);
            const double dq = p[1] + 2.0 * p[2] * s;
            const double ratio = dq / q;
            return {std::log(q), ratio, 2.0 * p[2] / q - ratio * ratio};
        }
        case Kind::ln_tau_exp: {
            const double x = 0.5 * r;
            const double lt = p[1];
            const double value = x > lt ? x + std::log1p(std::exp(lt - x))
                                        : lt + std::log1p(std::exp(x - lt));
            const double f = 0.5 / (1.0 + std::exp(lt - x));
            const double one_minus_2f = 1.0 / (1.0 + std::exp(x - lt));
            return {value, f, 0.5 * f * one_minus_2f};
        }
        case Kind::exp: {
            const Jet c = (*children_)[0].eval(r);
            const double e = std::exp(c.v);
            return {e, c.d1 * e, (c.d2 + c.d1 * c.d1) * e};
        }
        case Kind::sum: {
            Jet out;
            for (const Expr& c : *children_) {
                const Jet j = c.eval(r);
                out.v += j.v;
                out.d1 += j.d1;
                out.d2 += j.d2;
            }
            return out;
        }
        case Kind::scale: {
            const Jet c = (*children_)[0].eval(r);
            return {p[0] * c.v, p[0] * c.d1, p[0] * c.d2};
        }
    }
    return {};
}

double Expr::delta(double r0, double dr) const {
    const auto& p = params_;
    switch (kind_) {
        case Kind::affine:
            return p[0] * dr;
        case Kind::quadratic: {
            const double s0 = r0 - p[1];
            return p[0] * dr * (2.0 * s0 + dr);
        }
        case Kind::ln_sinh: {
            const double x0 = p[0] * r0;
            const double dx = p[0] * dr;
            if (x0 > 20.0 && x0 + dx > 20.0) {
                return dx + std::log1p(-std::exp(-2.0 * (x0 + dx))) -
                       std::log1p(-std::exp(-2.0 * x0));
            }
            const double diff = 2.0 * std::cosh(x0 + 0.5 * dx) * std::sinh(0.5 * dx);
            return std::log1p(diff / std::sinh(x0));
        }
        case Kind::ln_cosh: {
            const double x0 = p[0] * r0;
            const double dx = p[0] * dr;
            if (std::abs(x0) > 20.0 || std::abs(x0 + dx) > 20.0) {
                return log_cosh(x0 + dx) - log_cosh(x0);
            }
            const double diff = 2.0 * std::sinh(x0 + 0.5 * dx) * std::sinh(0.5 * dx);
            return std::log1p(diff / std::cosh(x0));
        }
        case Kind::ln_quadratic: {
            const double s0 = r0 - p[3];
            const double q = p[0] + s0 * (p[1] + p[2] * s0);
            return std::log1p(dr * (p[1] + p[2] * (2.0 * s0 + dr)) / q);
        }
        case Kind::ln_tau_exp: {
            const double x0 = 0.5 * r0;
            const double two_f = 1.0 / (1.0 + std::exp(p[1] - x0));
            return std::log1p(two_f * std::expm1(0.5 * dr));
        }
        case Kind::exp: {
            const Expr& c = (*children_)[0];
            return std::exp(c.eval(r0).v) * std::expm1(c.delta(r0, dr));
        }
        case Kind::sum: {
            double out = 0.0;
            for (const Expr& c : *children_) out += c.delta(r0, dr);
            return out;
        }
        case Kind::scale:
            return p[0] * (*children_)[0].delta(r0, dr);
    }
    return 0.0;
}

double Expr::domain_lo() const {
    switch (kind_) {
        case Kind::ln_sinh:
            return 0.0;
        case Kind::ln_quadratic: {
            // Interval of positivity containing the center.
            const double q0 = params_[0], q1 = params_[1], q2 = params_[2];
            if (q2 == 0.0) return q1 > 0.0 ? params_[3] - q0 / q1 : -kInf;
            const double disc = q1 * q1 - 4.0 * q2 * q0;
            if (disc < 0.0) return -kInf;
            const double sq = std::sqrt(disc);
            const double t = -0.5 * (q1 + std::copysign(sq, q1));
            double s1 = t / q2;
            double s2 = q0 / t;
            if (s1 > s2) std::swap(s1, s2);
            if (s2 < 0.0) return params_[3] + s2;
            if (s1 < 0.0 && q2 < 0.0) return params_[3] + s1;
            return -kInf;
        }
        case Kind::exp:
        case Kind::scale:
            return (*children_)[0].domain_lo();
        case Kind::sum: {
            double lo = -kInf;
            for (const Expr& c : *children_) lo = std::max(lo, c.domain_lo());
            return lo;
        }
        default:
            return -kInf;
    }
}

double Expr::domain_hi() const {
    switch (kind_) {
        case Kind::ln_quadratic: {
            const double q0 = params_[0], q1 = params_[1], q2 = params_[2];
            if (q2 == 0.0) return q1 < 0.0 ? params_[3] - q0 / q1 : kInf;
            const double disc = q1 * q1 - 4.0 * q2 * q0;
            if (disc < 0.0) return kInf;
            const double sq = std::sqrt(disc);
            const double t = -0.5 * (q1 + std::copysign(sq, q1));
            double s1 = t / q2;
            double s2 = q0 / t;
            if (s1 > s2) std::swap(s1, s2);
            if (s1 > 0.0) return params_[3] + s1;
            if (s2 > 0.0 && q2 < 0.0) return params_[3] + s2;
            return kInf;
        }
        case Kind::exp:
        case Kind::scale:
            return (*children_)[0].domain_hi();
        case Kind::sum: {
            double hi = kInf;
            for (const Expr& c : *children_) hi = std::min(hi, c.domain_hi());
            return hi;
        }
        default:
            return kInf;
    }
}

PiecewiseExpr::PiecewiseExpr(Expr single, double lo, double hi)
    : PiecewiseExpr(std::vector<double>{}, std::vector<Expr>{std::move(single)}, lo, hi) {}

PiecewiseExpr::PiecewiseExpr(std::vector<double> breakpoints, std::vector<Expr> segments,
                             double lo, double hi)
    : breakpoints_(std::move(breakpoints)), segments_(std::move(segments)), lo_(lo), hi_(hi) {
    if (segments_.size() != breakpoints_.size() + 1) {
        throw Error(ErrorKind::parameter, "piecewise expression needs one more segment than breakpoints");
    }
    if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()) ||
        std::adjacent_find(breakpoints_.begin(), breakpoints_.end()) != breakpoints_.end()) {
        throw Error(ErrorKind::parameter, "breakpoints must be strictly increasing");
    }
    if (!breakpoints_.empty() && (breakpoints_.front() <= lo_ || breakpoints_.back() >= hi_)) {
        throw Error(ErrorKind::parameter, "breakpoints must lie inside the domain");
    }
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        const double b = breakpoints_[i];
        const double left = segments_[i].eval(b).v;
        const double right = segments_[i + 1].eval(b).v;
        if (!(std::abs(left - right) <= 1e-12 * std::max(1.0, std::abs(right)))) {
            throw Error(ErrorKind::continuity,
                        "segments disagree at breakpoint " + std::to_string(b));
        }
    }
}

std::size_t PiecewiseExpr::segment_index(double r) const {
    return static_cast<std::size_t>(
        std::upper_bound(breakpoints_.begin(), breakpoints_.end(), r) - breakpoints_.begin());
}

Jet PiecewiseExpr::eval(double r) const {
    if (!(r >= lo_ && r <= hi_)) {
        throw Error(ErrorKind::domain, "evaluation point " + std::to_string(r) + " outside domain");
    }
    return segments_[segment_index(r)].eval(r);
}

Jet PiecewiseExpr::eval_left(double r) const {
    if (!(r >= lo_ && r <= hi_)) {
        throw Error(ErrorKind::domain, "evaluation point " + std::to_string(r) + " outside domain");
    }
    const auto i = static_cast<std::size_t>(
        std::lower_bound(breakpoints_.begin(), breakpoints_.end(), r) - breakpoints_.begin());
    return segments_[i].eval(r);
}

}  // namespace warpcurv
