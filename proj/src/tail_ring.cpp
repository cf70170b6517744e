#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "warpcurv/error.hpp"
#include "warpcurv/verifier.hpp"

namespace warpcurv {

namespace {

__extension__ typedef __int128 i128;

long long narrow(i128 x) {
    if (x > std::numeric_limits<long long>::max() || x < std::numeric_limits<long long>::min()) {
        throw Error(ErrorKind::guard, "rational coefficient overflow");
    }
    return static_cast<long long>(x);
}

Rational reduce(i128 num, i128 den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 a = num < 0 ? -num : num;
    i128 b = den;
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    return Rational(narrow(num), narrow(den));
}

int symbol_id(int i, int j) { return i * 64 + j; }

}  // namespace

Rational::Rational(long long num, long long den) : num_(num), den_(den) {
    if (den == 0) throw Error(ErrorKind::domain, "zero denominator");
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    const long long g = std::gcd(num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
}

std::string Rational::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
    return reduce(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                  static_cast<i128>(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
    return reduce(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

// ---------------------------------------------------------------------------

TailPolynomial::TailPolynomial(Rational constant) {
    if (!constant.is_zero()) terms_.emplace(TailMonomial{}, constant);
}

TailPolynomial TailPolynomial::F() {
    TailPolynomial p;
    p.terms_.emplace(TailMonomial{1, 0, 0, {}}, Rational(1));
    return p;
}

TailPolynomial TailPolynomial::u() {
    TailPolynomial p;
    p.terms_.emplace(TailMonomial{0, 1, 0, {}}, Rational(1));
    return p;
}

TailPolynomial TailPolynomial::eps() {
    TailPolynomial p;
    p.terms_.emplace(TailMonomial{0, 0, 1, {}}, Rational(1));
    return p;
}

TailPolynomial TailPolynomial::c(int i, int j) {
    TailPolynomial p;
    if (i == j || i < 2 || j < 2) return p;
    if (i < j) p.terms_.emplace(TailMonomial{0, 0, 0, {symbol_id(i, j)}}, Rational(1));
    else p.terms_.emplace(TailMonomial{0, 0, 0, {symbol_id(j, i)}}, Rational(-1));
    return p;
}

void TailPolynomial::add_term(const TailMonomial& m, const Rational& r) {
    if (r.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(m, r);
    if (inserted) return;
    it->second = it->second + r;
    if (it->second.is_zero()) terms_.erase(it);
}

TailPolynomial& TailPolynomial::operator+=(const TailPolynomial& o) {
    for (const auto& [m, r] : o.terms_) add_term(m, r);
    return *this;
}

TailPolynomial& TailPolynomial::operator-=(const TailPolynomial& o) {
    for (const auto& [m, r] : o.terms_) add_term(m, -r);
    return *this;
}

TailPolynomial operator-(const TailPolynomial& a) {
    TailPolynomial out;
    for (const auto& [m, r] : a.terms_) out.terms_.emplace(m, -r);
    return out;
}

TailPolynomial operator*(const TailPolynomial& a, const TailPolynomial& b) {
    TailPolynomial out;
    for (const auto& [ma, ra] : a.terms_) {
        for (const auto& [mb, rb] : b.terms_) {
            TailMonomial m{ma.f + mb.f, ma.u + mb.u, ma.eps + mb.eps, {}};
            m.c.reserve(ma.c.size() + mb.c.size());
            std::merge(ma.c.begin(), ma.c.end(), mb.c.begin(), mb.c.end(), std::back_inserter(m.c));
            out.add_term(m, ra * rb);
        }
    }
    return out;
}

TailPolynomial operator*(const Rational& s, const TailPolynomial& a) {
    TailPolynomial out;
    if (s.is_zero()) return out;
    for (const auto& [m, r] : a.terms_) out.terms_.emplace(m, s * r);
    return out;
}

TailPolynomial TailPolynomial::derivative() const {
    // d(F^a u^b) = (a/2) F^a u^b - (a + b) F^(a+1) u^b
    TailPolynomial out;
    for (const auto& [m, r] : terms_) {
        if (m.f > 0) out.add_term(m, r * Rational(m.f, 2));
        if (m.f + m.u > 0) {
            TailMonomial up = m;
            ++up.f;
            out.add_term(up, r * Rational(-(m.f + m.u)));
        }
    }
    return out;
}

double TailPolynomial::evaluate(double F, double u, double eps, const StructureConstants& sc) const {
    double sum = 0.0;
    for (const auto& [m, r] : terms_) {
        double t = r.to_double() * std::pow(F, m.f) * std::pow(u, m.u) * std::pow(eps, m.eps);
        for (int id : m.c) t *= sc.at(id / 64, id % 64);
        sum += t;
    }
    return sum;
}

double TailPolynomial::bound(double eps, double tau) const {
    double sum = 0.0;
    for (const auto& [m, r] : terms_) {
        sum += std::abs(r.to_double()) * std::pow(eps, m.eps) * std::pow(0.5, static_cast<double>(m.c.size())) *
               std::pow(0.5, m.f) * std::pow(1.0 / tau, m.u);
    }
    return sum;
}

int TailPolynomial::min_f_degree() const {
    int d = -1;
    for (const auto& [m, r] : terms_) d = d < 0 ? m.f : std::min(d, m.f);
    return d;
}

std::string TailPolynomial::to_string() const {
    if (terms_.empty()) return "0";
    auto power = [](const std::string& base, int e) {
        return e == 1 ? base : base + "^" + std::to_string(e);
    };
    std::string out;
    bool first = true;
    for (const auto& [m, r] : terms_) {
        std::vector<std::string> factors;
        if (m.eps > 0) factors.push_back(power("eps", m.eps));
        for (std::size_t k = 0; k < m.c.size();) {
            std::size_t e = k;
            while (e < m.c.size() && m.c[e] == m.c[k]) ++e;
            const int i = m.c[k] / 64;
            const int j = m.c[k] % 64;
            const std::string name = i < 10 && j < 10 ? "c" + std::to_string(i) + std::to_string(j)
                                                      : "c" + std::to_string(i) + "_" + std::to_string(j);
            factors.push_back(power(name, static_cast<int>(e - k)));
            k = e;
        }
        if (m.f > 0) factors.push_back(power("F", m.f));
        if (m.u > 0) factors.push_back(power("u", m.u));

        const bool negative = r.num() < 0;
        const Rational mag(negative ? -r.num() : r.num(), r.den());
        if (first) out += negative ? "-" : "";
        else out += negative ? " - " : " + ";
        first = false;
        std::string body = (mag == Rational(1) && !factors.empty()) ? "" : mag.to_string();
        for (const auto& f : factors) body += (body.empty() ? "" : " ") + f;
        out += body;
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

using P = TailPolynomial;

void check_frame(const StructureConstants& sc) {
    if (sc.n < 2) throw Error(ErrorKind::parameter, "tail ring needs complex dimension n >= 2");
}

P slope(int i) { return i == 1 ? P(Rational(1)) : P::F(); }

P radial(int i) { return i == 1 ? P(Rational(-1)) : Rational(-1, 2) * P::F(); }

int delta(int a, int b) { return a == b ? 1 : 0; }

/// <[Y_x, Y_y], Y_z> = c_xy v / g^2 = 4 eps F^2 c_xy when z = 1.
P bracket(int x, int y, int z) {
    if (z != 1 || x < 2 || y < 2) return {};
    return Rational(4) * P::eps() * P::F() * P::F() * P::c(x, y);
}

/// <R(d_r, Y_a) Y_b, Y_c> for a, b, c >= 1.
P radial_mixed(int a, int b, int c) {
    P out = bracket(a, b, c) * (slope(c) - slope(b));
    out += bracket(c, a, b) * (slope(b) - slope(c));
    out += bracket(c, b, a) * (Rational(2) * slope(a) - slope(b) - slope(c));
    return Rational(1, 2) * out;
}

/// Fiber part (all indices >= 1) before the warped-product correction.
P fiber(int a, int b, int c, int d) {
    const int ones = (a == 1) + (b == 1) + (c == 1) + (d == 1);
    if (ones == 0) {
        // u^2 R_base + 4 eps^2 F^4 (A-tensor terms); <X_i, J X_j> = 2 c_ij.
        P base(Rational(delta(b, c) * delta(a, d) - delta(a, c) * delta(b, d)));
        base += Rational(4) * P::c(c, b) * P::c(d, a);
        base -= Rational(4) * P::c(c, a) * P::c(d, b);
        base += Rational(8) * P::c(a, b) * P::c(d, c);
        P a_terms = Rational(2) * P::c(a, b) * P::c(c, d);
        a_terms -= P::c(b, c) * P::c(a, d);
        a_terms += P::c(a, c) * P::c(b, d);
        const P F4 = P::F() * P::F() * P::F() * P::F();
        return Rational(-1, 4) * P::u() * P::u() * base + Rational(4) * P::eps() * P::eps() * F4 * a_terms;
    }
    if (ones != 2) return {};
    // <A_{X_x} X_1, A_{X_y} X_1> scaled: eps^2 F^4 delta_xy; the sign follows the slot pattern.
    if ((a == 1) == (b == 1)) return {};
    int x = 0;
    int y = 0;
    int sign = 0;
    if (b == 1 && c == 1) { x = a; y = d; sign = 1; }
    else if (a == 1 && d == 1) { x = b; y = c; sign = 1; }
    else if (a == 1 && c == 1) { x = b; y = d; sign = -1; }
    else { x = a; y = c; sign = -1; }
    if (x != y) return {};
    const P F4 = P::F() * P::F() * P::F() * P::F();
    return Rational(sign) * P::eps() * P::eps() * F4;
}

}  // namespace

TailPolynomial tail_connection(const StructureConstants& sc, int x, int y, int z) {
    check_frame(sc);
    const int N = 2 * sc.n;
    if (x < 0 || y < 0 || z < 0 || x >= N || y >= N || z >= N) {
        throw Error(ErrorKind::domain, "frame index out of range");
    }
    const P two_eps_F2 = Rational(2) * P::eps() * P::F() * P::F();
    if (x == 0) return {};
    if (x == 1) {
        if (y == 0) return z == 1 ? P(Rational(1)) : P{};
        if (y == 1) return z == 0 ? P(Rational(-1)) : P{};
        return z >= 2 ? -(two_eps_F2 * P::c(y, z)) : P{};
    }
    if (y == 0) return z == x ? P::F() : P{};
    if (y == x) return z == 0 ? -P::F() : P{};
    if (y == 1) return z >= 2 ? -(two_eps_F2 * P::c(x, z)) : P{};
    return z == 1 ? two_eps_F2 * P::c(x, y) : P{};
}

TailPolynomial tail_curvature(const StructureConstants& sc, int a, int b, int c, int d) {
    check_frame(sc);
    const int N = 2 * sc.n;
    for (int i : {a, b, c, d}) {
        if (i < 0 || i >= N) throw Error(ErrorKind::domain, "frame index out of range");
    }
    const int zeros = (a == 0) + (b == 0) + (c == 0) + (d == 0);
    if (zeros >= 3) return {};
    if (zeros == 2) {
        if ((a == 0 && b == 0) || (c == 0 && d == 0)) return {};
        if (a == 0 && d == 0) return b == c ? radial(b) : P{};
        if (b == 0 && c == 0) return a == d ? radial(a) : P{};
        if (a == 0 && c == 0) return b == d ? -radial(b) : P{};
        return a == c ? -radial(a) : P{};
    }
    if (zeros == 1) {
        if (a == 0) return radial_mixed(b, c, d);
        if (b == 0) return -radial_mixed(a, c, d);
        if (c == 0) return radial_mixed(d, a, b);
        return -radial_mixed(c, a, b);
    }
    const int w = delta(b, c) * delta(a, d) - delta(a, c) * delta(b, d);
    return fiber(a, b, c, d) - Rational(w) * slope(a) * slope(b);
}

std::span<const NamedComponent> named_components() {
    static const NamedComponent table[] = {
        {"k21", {2, 1, 1, 2}}, {"k32", {3, 2, 2, 3}}, {"kr1", {1, 0, 0, 1}},
        {"kr2", {2, 0, 0, 2}}, {"mixed", {0, 1, 2, 3}},
    };
    return table;
}

CurvatureClosure covariant_derivative_closure(int kmax, const StructureConstants& sc) {
    if (kmax > 6) throw Error(ErrorKind::guard, "kmax " + std::to_string(kmax) + " exceeds 6");
    if (kmax < 0) throw Error(ErrorKind::parameter, "kmax must be non-negative");
    check_frame(sc);
    const int N = 2 * sc.n;

    std::vector<P> gamma(static_cast<std::size_t>(N * N * N));
    for (int x = 0; x < N; ++x)
        for (int y = 0; y < N; ++y)
            for (int z = 0; z < N; ++z) gamma[static_cast<std::size_t>((x * N + y) * N + z)] = tail_connection(sc, x, y, z);

    CurvatureClosure out;
    out.frame_size = N;
    ClosureOrder r0;
    r0.components.resize(static_cast<std::size_t>(N * N * N * N));
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            for (int c = 0; c < N; ++c)
                for (int d = 0; d < N; ++d)
                    r0.components[static_cast<std::size_t>(((a * N + b) * N + c) * N + d)] =
                        tail_curvature(sc, a, b, c, d);
    out.orders.push_back(std::move(r0));

    for (int k = 1; k <= kmax; ++k) {
        const auto& S = out.orders.back().components;
        const int L = 3 + k;  // rank of S
        const std::size_t size = S.size();
        std::vector<std::size_t> stride(static_cast<std::size_t>(L));
        std::size_t s = 1;
        for (int j = L - 1; j >= 0; --j) {
            stride[static_cast<std::size_t>(j)] = s;
            s *= static_cast<std::size_t>(N);
        }
        ClosureOrder next;
        next.k = k;
        next.components.resize(size * static_cast<std::size_t>(N));
        std::vector<int> digits(static_cast<std::size_t>(L));
        for (int x = 0; x < N; ++x) {
            for (std::size_t idx = 0; idx < size; ++idx) {
                P res = x == 0 ? S[idx].derivative() : P{};
                std::size_t rest = idx;
                for (int j = 0; j < L; ++j) {
                    digits[static_cast<std::size_t>(j)] = static_cast<int>(rest / stride[static_cast<std::size_t>(j)]);
                    rest %= stride[static_cast<std::size_t>(j)];
                }
                for (int j = 0; j < L; ++j) {
                    const int ij = digits[static_cast<std::size_t>(j)];
                    for (int z = 0; z < N; ++z) {
                        const P& g = gamma[static_cast<std::size_t>((x * N + ij) * N + z)];
                        if (g.is_zero()) continue;
                        const std::size_t other = idx - static_cast<std::size_t>(ij) * stride[static_cast<std::size_t>(j)] +
                                                  static_cast<std::size_t>(z) * stride[static_cast<std::size_t>(j)];
                        if (S[other].is_zero()) continue;
                        res -= g * S[other];
                    }
                }
                next.components[static_cast<std::size_t>(x) * size + idx] = std::move(res);
            }
        }
        out.orders.push_back(std::move(next));
    }

    for (auto& ord : out.orders) {
        ord.nonzero = 0;
        ord.min_f_degree = -1;
        for (const auto& p : ord.components) {
            if (p.is_zero()) continue;
            ++ord.nonzero;
            const int d = p.min_f_degree();
            ord.min_f_degree = ord.min_f_degree < 0 ? d : std::min(ord.min_f_degree, d);
        }
    }
    return out;
}

const TailPolynomial& CurvatureClosure::at(int k, std::span<const int> index) const {
    if (k < 0 || k >= static_cast<int>(orders.size()) || static_cast<int>(index.size()) != 4 + k) {
        throw Error(ErrorKind::domain, "closure index has the wrong order");
    }
    std::size_t flat = 0;
    for (int i : index) {
        if (i < 0 || i >= frame_size) throw Error(ErrorKind::domain, "frame index out of range");
        flat = flat * static_cast<std::size_t>(frame_size) + static_cast<std::size_t>(i);
    }
    return orders[static_cast<std::size_t>(k)].components[flat];
}

double CurvatureClosure::bound(int k, double eps, double tau) const {
    if (k < 0 || k >= static_cast<int>(orders.size())) throw Error(ErrorKind::domain, "closure order out of range");
    double b = 0.0;
    for (const auto& p : orders[static_cast<std::size_t>(k)].components) b = std::max(b, p.bound(eps, tau));
    return b;
}

}  // namespace warpcurv
