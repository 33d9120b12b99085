#pragma once

#include "anneal/potential.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace anneal {

// x_i - 2L * floor((x_i + L) / 2L), the representative in [-L, L)
inline double wrap_coord(double x, double L) {
    double y = x - 2.0 * L * std::floor((x + L) / (2.0 * L));
    // floor rounding can land exactly on +L
    if (y >= L) y -= 2.0 * L;
    return y;
}

inline void wrap_point(std::span<double> x, double L) {
    for (double& v : x) v = wrap_coord(v, L);
}

// Smooth cap profile: chi(u) = u for u <= 1, saturating at 1 + margin above.
// U_K = K * chi(U/K) equals U on {U <= K} and stays within [0, K(1+margin)].
inline double cap_chi(double u, double margin) {
    if (u <= 1.0) return u;
    return 1.0 + margin * (1.0 - std::exp(-(u - 1.0) / margin));
}
inline double cap_chi_prime(double u, double margin) {
    if (u <= 1.0) return 1.0;
    return std::exp(-(u - 1.0) / margin);
}

// Periodic localization of a potential: the torus [-L_K, L_K)^d carrying the
// capped potential U_K. Requires {U <= K} inside [-(L_K-1), L_K-1]^d so the
// cap region never touches the wrap seam.
struct TorusSpec {
    Potential base;
    double K;
    double L;
    double cap_margin;
    Potential capped;

    int dim() const { return base.dim; }
};

inline TorusSpec make_torus(const Potential& p, double K, double L, double cap_margin = 0.25) {
    if (!(K > 0.0)) throw std::invalid_argument("make_torus: K must be > 0");
    if (!(L > 1.0)) throw std::invalid_argument("make_torus: L must be > 1");
    if (!(cap_margin > 0.0)) throw std::invalid_argument("make_torus: cap_margin must be > 0");

    // spot-check the sublevel-set containment on the boundary shell of the grid
    if (p.dim <= 2) {
        const int n = 64;
        std::vector<double> x(p.dim);
        auto check = [&](std::span<const double> pt) {
            if (p.value(pt) <= K)
                throw std::invalid_argument(
                    "make_torus: {U <= K} reaches the margin shell, increase L");
        };
        if (p.dim == 1) {
            check(std::span<const double>(&(x[0] = L - 1.0), 1));
            check(std::span<const double>(&(x[0] = -(L - 1.0)), 1));
        } else {
            for (int i = 0; i <= n; ++i) {
                double s = -(L - 1.0) + 2.0 * (L - 1.0) * i / n;
                for (double edge : {-(L - 1.0), L - 1.0}) {
                    x = {edge, s};
                    check(x);
                    x = {s, edge};
                    check(x);
                }
            }
        }
    }

    TorusSpec ts;
    ts.base = p;
    ts.K = K;
    ts.L = L;
    ts.cap_margin = cap_margin;

    Potential base = p;  // captured by value
    double m = cap_margin;
    ts.capped = p;
    ts.capped.name = p.name + "_capped";
    ts.capped.value = [base, K, m](std::span<const double> x) {
        return K * cap_chi(base.value(x) / K, m);
    };
    ts.capped.gradient = [base, K, m](std::span<const double> x, std::span<double> g) {
        double u = base.value(x) / K;
        base.gradient(x, g);
        double f = cap_chi_prime(u, m);
        for (double& v : g) v *= f;
    };
    ts.capped.laplacian = nullptr;  // not needed on the torus
    ts.capped.known_c_star.reset();
    return ts;
}

} // namespace anneal
