#include "warpcurv/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "warpcurv/error.hpp"

namespace warpcurv {

GaussLegendre compute_gauss_legendre(int n) {
    if (n < 1) throw Error(ErrorKind::parameter, "quadrature order must be positive");
    GaussLegendre gl;
    gl.nodes.assign(n, 0.0);
    gl.weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        gl.weights[i] = w;
        gl.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
    return gl;
}

const GaussLegendre& gauss_legendre(int n) {
    static const GaussLegendre g64 = compute_gauss_legendre(64);
    static const GaussLegendre g128 = compute_gauss_legendre(128);
    static const GaussLegendre g32 = compute_gauss_legendre(32);
    if (n == 64) return g64;
    if (n == 128) return g128;
    if (n == 32) return g32;
    thread_local GaussLegendre other;
    other = compute_gauss_legendre(n);
    return other;
}

}  // namespace warpcurv
