#pragma once

#include <vector>

namespace warpcurv {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes and weights of order n, computed by Newton iteration on P_n.
/// Orders 64 and 128 are cached; other orders are computed on demand.
[[nodiscard]] const GaussLegendre& gauss_legendre(int n);

[[nodiscard]] GaussLegendre compute_gauss_legendre(int n);

/// Integral of f over [a, b] with the order-n rule.
template <class F>
[[nodiscard]] double integrate(F&& f, double a, double b, int n = 64) {
    const GaussLegendre& gl = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        sum += gl.weights[i] * f(mid + half * gl.nodes[i]);
    }
    return sum * half;
}

}  // namespace warpcurv
