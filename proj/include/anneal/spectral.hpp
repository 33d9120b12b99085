#pragma once

#include "anneal/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace anneal {

// Finite-difference discretization of -L_beta = -1/2(d^2/dx^2 - beta U' d/dx)
// on the 1-D torus, n nodes, spacing h = 2L/n. The operator is similar to a
// symmetric periodic tridiagonal matrix B (tridiagonal plus two corner
// entries); B is assembled from exponentials of local potential differences,
// which keeps every entry O(1/h^2) at any beta.
struct GeneratorMatrix {
    int n = 0;
    double h = 0.0;
    double beta = 0.0;
    std::vector<double> u_node;  // U_K(x_i)
    std::vector<double> u_mid;   // U_K(x_i + h/2), edge between i and i+1 (mod n)
    std::vector<double> diag;    // B_ii
    std::vector<double> off;     // B_{i,i+1 mod n}; off[n-1] is the corner entry

    // action of the unsymmetrized -L on node values, used for kernel and
    // detailed-balance checks; weights are rescaled by e^{+beta*minU} so the
    // ratios stay representable
    std::vector<double> apply_neg_L(const std::vector<double>& phi) const {
        if (static_cast<int>(phi.size()) != n)
            throw std::invalid_argument("apply_neg_L: size mismatch");
        double umin = *std::min_element(u_node.begin(), u_node.end());
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i) {
            int ip = (i + 1) % n, im = (i + n - 1) % n;
            double wp = std::exp(-beta * (u_mid[i] - umin));
            double wm = std::exp(-beta * (u_mid[im] - umin));
            double m = std::exp(-beta * (u_node[i] - umin));
            out[i] = -(wp * (phi[ip] - phi[i]) + wm * (phi[im] - phi[i])) / (2.0 * h * h * m);
        }
        return out;
    }
};

inline GeneratorMatrix assemble(const TorusSpec& ts, double beta, int n) {
    if (ts.dim() != 1) throw std::invalid_argument("assemble: 1-D torus only");
    if (n < 16) throw std::invalid_argument("assemble: n must be >= 16");
    if (!(beta > 0.0)) throw std::invalid_argument("assemble: beta must be > 0");
    GeneratorMatrix gm;
    gm.n = n;
    gm.h = 2.0 * ts.L / n;
    gm.beta = beta;
    gm.u_node.resize(n);
    gm.u_mid.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = -ts.L + i * gm.h;
        gm.u_node[i] = ts.capped.value1(x);
        gm.u_mid[i] = ts.capped.value1(wrap_coord(x + 0.5 * gm.h, ts.L));
    }
    const double s = 1.0 / (2.0 * gm.h * gm.h);
    gm.off.resize(n);
    gm.diag.resize(n);
    for (int i = 0; i < n; ++i) {
        int ip = (i + 1) % n;
        gm.off[i] = -s * std::exp(beta * (0.5 * (gm.u_node[i] + gm.u_node[ip]) - gm.u_mid[i]));
    }
    for (int i = 0; i < n; ++i) {
        int im = (i + n - 1) % n;
        gm.diag[i] = s * (std::exp(beta * (gm.u_node[i] - gm.u_mid[i])) +
                          std::exp(beta * (gm.u_node[i] - gm.u_mid[im])));
    }
    return gm;
}

namespace detail {

// Number of eigenvalues of B - sigma*I that are negative, by LDL^T inertia.
// The periodic corner is handled by bordering: factor the leading (n-1)x(n-1)
// tridiagonal block while propagating the last column, then add the Schur
// complement pivot. Returns false if a pivot of the leading block fell below
// the floor; a clamped pivot poisons the propagated column, so the caller
// retries at a nudged sigma instead of trusting the count.
inline bool neg_count_attempt(const GeneratorMatrix& gm, double sigma, double pivot_floor,
                              int& count) {
    const int n = gm.n;
    bool clean = true;
    count = 0;
    // y: last column of the bordered system restricted to rows 0..n-2
    long double d_prev = static_cast<long double>(gm.diag[0]) - sigma;
    if (std::abs(static_cast<double>(d_prev)) < pivot_floor) {
        d_prev = -pivot_floor;
        clean = false;
    }
    if (d_prev < 0.0L) ++count;
    long double y_prev = gm.off[n - 1];  // corner entry (0, n-1)
    long double schur = y_prev * y_prev / d_prev;
    for (int i = 1; i <= n - 2; ++i) {
        long double b = gm.off[i - 1];
        long double d = static_cast<long double>(gm.diag[i]) - sigma - b * b / d_prev;
        if (std::abs(static_cast<double>(d)) < pivot_floor) {
            d = -pivot_floor;
            clean = false;
        }
        if (d < 0.0L) ++count;
        long double v = (i == n - 2) ? static_cast<long double>(gm.off[n - 2]) : 0.0L;
        long double y = v - (b / d_prev) * y_prev;
        schur += y * y / d;
        d_prev = d;
        y_prev = y;
    }
    long double d_last = static_cast<long double>(gm.diag[n - 1]) - sigma - schur;
    if (d_last < 0.0L) ++count;
    return clean;
}

inline int neg_count(const GeneratorMatrix& gm, double sigma) {
    double scale = 0.0;
    for (int i = 0; i < gm.n; ++i)
        scale = std::max(scale, std::abs(gm.diag[i]) + 2.0 * std::abs(gm.off[i]));
    const double pivot_floor = 1e-14 * std::max(scale, 1.0);
    int count = 0;
    // exact hits on eigenvalues of the leading block break the bordered
    // factorization; stepping sigma by a few floors sidesteps them without
    // moving past any eigenvalue of B that bisection could resolve
    for (int attempt = 0; attempt < 4; ++attempt) {
        double nudge = attempt * 4.0 * pivot_floor;
        if (neg_count_attempt(gm, sigma + nudge, pivot_floor, count)) return count;
    }
    return count;
}

// k-th smallest eigenvalue (k = 0 is the smallest), bisection on inertia
inline double eigenvalue_k(const GeneratorMatrix& gm, int k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < gm.n; ++i) {
        double r = std::abs(gm.off[i]) + std::abs(gm.off[(i + gm.n - 1) % gm.n]);
        lo = std::min(lo, gm.diag[i] - r);
        hi = std::max(hi, gm.diag[i] + r);
    }
    double scale = std::max(std::abs(lo), std::abs(hi));
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (neg_count(gm, mid) > k)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-14 + 4.0 * std::numeric_limits<double>::epsilon() * scale) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

struct GapResult {
    double lambda0;  // smallest eigenvalue, should vanish (constants in kernel)
    double gap;      // second smallest eigenvalue of -L
};

inline GapResult spectral_gap(const GeneratorMatrix& gm) {
    GapResult r;
    r.lambda0 = detail::eigenvalue_k(gm, 0);
    if (std::abs(r.lambda0) > 1e-10)
        throw std::runtime_error("spectral_gap: kernel eigenvalue " + std::to_string(r.lambda0) +
                                 " exceeds 1e-10, discretization inconsistent");
    r.gap = detail::eigenvalue_k(gm, 1);
    return r;
}

// Dense oracle: full spectrum by cyclic Jacobi rotations, n <= 512.
inline std::vector<double> dense_spectrum(const GeneratorMatrix& gm) {
    const int n = gm.n;
    if (n > 512) throw std::invalid_argument("dense_spectrum: n must be <= 512");
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        a[i][i] = gm.diag[i];
        int ip = (i + 1) % n;
        a[i][ip] = a[ip][i] = gm.off[i];
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double offnorm = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) offnorm += a[p][q] * a[p][q];
        if (offnorm < 1e-22 * n * n) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

struct GapFit {
    double rate;    // fitted exponential decay rate of the gap in beta
    double gamma;   // fitted prefactor constant
    std::vector<double> betas;
    std::vector<double> gaps;
};

// Least-squares fit of log(gap) - prefactor_exponent*log(beta+1) against beta;
// rate = -slope, gamma = exp(intercept). The default exponent +1 is the
// Kramers small-temperature prefactor of the 1-D gap, which the fitted decay
// rate is compared against c*; see docs for the bound-versus-asymptotics
// discussion.
inline GapFit fit_gap_exponent(const TorusSpec& ts, const std::vector<double>& betas, int n,
                               double prefactor_exponent = 1.0) {
    if (betas.size() < 6) throw std::invalid_argument("fit_gap_exponent: need >= 6 betas");
    if (!std::is_sorted(betas.begin(), betas.end()) || !(betas.back() >= 3.0 * betas.front()))
        throw std::invalid_argument("fit_gap_exponent: betas must increase and span >= 3x");
    GapFit fit;
    fit.betas = betas;
    for (double b : betas) {
        double g = spectral_gap(assemble(ts, b, n)).gap;
        fit.gaps.push_back(g);
    }
    if (fit.gaps.back() < 1e-13)
        throw std::runtime_error("fit_gap_exponent: gap below resolution floor at beta=" +
                                 std::to_string(betas.back()));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(betas.size());
    for (std::size_t i = 0; i < betas.size(); ++i) {
        double x = betas[i];
        double y = std::log(fit.gaps[i]) - prefactor_exponent * std::log(betas[i] + 1.0);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    double intercept = (sy - slope * sx) / m;
    fit.rate = -slope;
    fit.gamma = std::exp(intercept);
    return fit;
}

} // namespace anneal
