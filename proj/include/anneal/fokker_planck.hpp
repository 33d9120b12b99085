#pragma once

#include "anneal/potential.hpp"
#include "anneal/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace anneal {

enum class FpBoundary { no_flux, periodic };

// Cell-averaged density on a uniform 1-D grid. Cell i covers
// [lo + i*h, lo + (i+1)*h] with center x_i = lo + (i+1/2)*h.
struct DensityGrid {
    double lo = 0.0;
    double h = 0.0;
    FpBoundary boundary = FpBoundary::no_flux;
    std::vector<double> f;  // cell averages
    double t = 0.0;
    double beta = 0.0;

    int n() const { return static_cast<int>(f.size()); }
    double center(int i) const { return lo + (i + 0.5) * h; }
    double mass() const {
        double s = 0.0;
        for (double v : f) s += v;
        return s * h;
    }

    static DensityGrid from_function(double lo, double hi, int n, FpBoundary bc,
                                     const std::function<double(double)>& f0) {
        if (n < 8) throw std::invalid_argument("DensityGrid: n must be >= 8");
        if (!(hi > lo)) throw std::invalid_argument("DensityGrid: need hi > lo");
        DensityGrid dg;
        dg.lo = lo;
        dg.h = (hi - lo) / n;
        dg.boundary = bc;
        dg.f.resize(n);
        for (int i = 0; i < n; ++i) {
            double v = f0(dg.center(i));
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("DensityGrid: f0 must be finite and nonnegative");
            dg.f[i] = v;
        }
        double m = dg.mass();
        if (!(m > 0.0)) throw std::invalid_argument("DensityGrid: f0 has no mass");
        for (double& v : dg.f) v /= m;
        return dg;
    }

    // discrete Gibbs density: exactly stationary for the divergence-form scheme
    static DensityGrid gibbs(const Potential& p, double beta, double lo, double hi, int n,
                             FpBoundary bc) {
        DensityGrid dg = from_function(lo, hi, n, bc,
                                       [&](double x) { return std::exp(-beta * p.value1(x)); });
        dg.beta = beta;
        return dg;
    }
};

struct FpCheckpoint {
    double t;
    double beta;
    double mass;
    double u;      // E[U] under f
    double kappa;  // entropy functional at the current beta
    std::vector<double> f;
};

struct FpRunResult {
    DensityGrid final_state;
    std::vector<FpCheckpoint> checkpoints;  // first entry is the initial state
    std::uint64_t steps = 0;
    std::uint64_t clipped_cells = 0;  // negative cells zeroed (roundoff guard)
    double max_mass_drift = 0.0;      // worst |mass - 1| seen before renormalization
};

inline double moment_U(const DensityGrid& dg, const Potential& p) {
    double s = 0.0;
    for (int i = 0; i < dg.n(); ++i) s += p.value1(dg.center(i)) * dg.f[i];
    return s * dg.h;
}

// kappa = sum f_i log(1 + f_i e^{beta U_i}) h, with the large-exponent branch
// log(1 + f e^a) = a + log(f + e^{-a}) to avoid overflow
inline double entropy_kappa(const DensityGrid& dg, const Potential& p, double beta) {
    double s = 0.0;
    for (int i = 0; i < dg.n(); ++i) {
        double fi = dg.f[i];
        if (fi <= 0.0) continue;
        double a = beta * p.value1(dg.center(i));
        double term = a > 30.0 ? a + std::log(fi + std::exp(-a)) : std::log1p(fi * std::exp(a));
        s += fi * term;
    }
    return s * dg.h;
}

namespace detail {

inline FpCheckpoint snapshot(const DensityGrid& dg, const Potential& p) {
    return {dg.t, dg.beta, dg.mass(), moment_U(dg, p), entropy_kappa(dg, p, dg.beta), dg.f};
}

} // namespace detail

// Explicit conservative finite-volume integration of
//   df/dt = 1/2 d/dx [ e^{-beta U} d/dx (f e^{beta U}) ]
// with fluxes F_{i+1/2} = 1/2 e^{-beta U(mid)} (g_{i+1} - g_i)/h, g = f e^{beta U}.
// Mass is conserved by telescoping; the discrete Gibbs density is exactly
// stationary at constant beta. beta is evaluated at t + dt/2.
inline FpRunResult evolve(const DensityGrid& dg0, const Potential& p, const CoolingSchedule& s,
                          double t_end, double dt, std::vector<double> checkpoints = {}) {
    if (p.dim != 1) throw std::invalid_argument("evolve: 1-D potentials only");
    if (!(t_end > dg0.t)) throw std::invalid_argument("evolve: t_end must exceed start time");
    if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be > 0");

    DensityGrid dg = dg0;
    const int n = dg.n();
    const double h = dg.h;
    const bool periodic = dg.boundary == FpBoundary::periodic;

    // frozen tables: U at cell centers and at interfaces
    std::vector<double> uc(n), um(n + 1);
    for (int i = 0; i < n; ++i) uc[i] = p.value1(dg.center(i));
    for (int i = 0; i <= n; ++i) um[i] = p.value1(dg.lo + i * h);

    // stability: positivity of the explicit update plus the documented
    // drift-aware bound, both at the stiffest beta of the run
    const double beta_end = s.beta(t_end);
    double coef_max = 0.0, drift_max = 0.0;
    for (int i = 0; i < n; ++i) {
        double cp = std::exp(beta_end * (uc[i] - um[i + 1]));
        double cm = std::exp(beta_end * (uc[i] - um[i]));
        coef_max = std::max(coef_max, cp + cm);
        drift_max = std::max(drift_max, 0.5 * beta_end * std::abs(p.gradient1(dg.center(i))));
    }
    double dt_stable = std::min(2.0 * h * h / coef_max, h * h / (1.0 + drift_max * h));
    if (dt > dt_stable)
        throw std::invalid_argument("evolve: dt=" + std::to_string(dt) +
                                    " violates stability bound " + std::to_string(dt_stable));

    std::sort(checkpoints.begin(), checkpoints.end());
    while (!checkpoints.empty() && checkpoints.front() <= dg.t) checkpoints.erase(checkpoints.begin());
    if (checkpoints.empty() || checkpoints.back() < t_end) checkpoints.push_back(t_end);

    FpRunResult run;
    dg.beta = s.beta(dg.t);
    run.checkpoints.push_back(detail::snapshot(dg, p));

    const double target_mass = dg.mass();
    std::vector<double> g(n), flux(n + 1, 0.0);
    std::size_t ci = 0;

    while (dg.t < t_end - 1e-12 * t_end) {
        double step_dt = std::min(dt, checkpoints[ci] - dg.t);
        double b = s.beta(dg.t + 0.5 * step_dt);
        for (int i = 0; i < n; ++i) g[i] = dg.f[i] * std::exp(b * uc[i]);
        for (int i = 1; i < n; ++i)
            flux[i] = 0.5 * std::exp(-b * um[i]) * (g[i] - g[i - 1]) / h;
        if (periodic)
            flux[0] = flux[n] = 0.5 * std::exp(-b * um[0]) * (g[0] - g[n - 1]) / h;
        else
            flux[0] = flux[n] = 0.0;
        for (int i = 0; i < n; ++i)
            dg.f[i] += step_dt * (flux[i + 1] - flux[i]) / h;

        // roundoff guard: tiny negatives are clipped and mass restored
        bool clipped = false;
        for (double& v : dg.f) {
            if (v < 0.0) {
                if (v < -1e-10)
                    throw std::runtime_error("evolve: negative density " + std::to_string(v) +
                                             " beyond clip threshold at t=" +
                                             std::to_string(dg.t));
                v = 0.0;
                ++run.clipped_cells;
                clipped = true;
            }
        }
        if (clipped) {
            double m = dg.mass();
            run.max_mass_drift = std::max(run.max_mass_drift, std::abs(m - target_mass));
            for (double& v : dg.f) v *= target_mass / m;
        }

        dg.t += step_dt;
        ++run.steps;
        if (dg.t >= checkpoints[ci] - 1e-12 * (1.0 + checkpoints[ci])) {
            dg.t = checkpoints[ci];
            dg.beta = s.beta(dg.t);
            run.checkpoints.push_back(detail::snapshot(dg, p));
            ++ci;
            if (ci == checkpoints.size()) break;
        }
    }
    dg.beta = s.beta(dg.t);
    run.final_state = dg;
    return run;
}

struct BoundReport {
    double bound = 0.0;
    double max_value = 0.0;
    double max_ratio = 0.0;
    bool holds = false;
    std::vector<double> trajectory;  // the monitored functional per checkpoint
};

// sup_t E[U(X_t)] <= (kappa(f0) - log a0) / (beta0 - alpha0), checked at the
// run's checkpoints; a0 = 1/Z_{alpha0} must come from the same domain.
inline BoundReport verify_super_bound(const FpRunResult& run, double beta0, double alpha0,
                                      double a0) {
    if (!(beta0 > alpha0)) throw std::invalid_argument("verify_super_bound: need beta0 > alpha0");
    if (!(a0 > 0.0)) throw std::invalid_argument("verify_super_bound: a0 must be > 0");
    BoundReport rep;
    rep.bound = (run.checkpoints.front().kappa - std::log(a0)) / (beta0 - alpha0);
    for (const auto& cp : run.checkpoints) {
        rep.trajectory.push_back(cp.u);
        rep.max_value = std::max(rep.max_value, cp.u);
    }
    rep.max_ratio = rep.max_value / rep.bound;
    rep.holds = rep.max_value <= rep.bound;
    return rep;
}

namespace detail {

// discrete chi-square of a checkpoint against the same-grid Gibbs density
inline double grid_chi_square(const FpCheckpoint& cp, const DensityGrid& shape,
                              const Potential& p, double beta) {
    const int n = static_cast<int>(cp.f.size());
    double z = 0.0;
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        w[i] = std::exp(-beta * p.value1(shape.center(i)));
        z += w[i];
    }
    z *= shape.h;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        if (w[i] <= 0.0) continue;
        s += cp.f[i] * cp.f[i] / (w[i] / z);
    }
    return s * shape.h;
}

} // namespace detail

// chi_square(f_t, mu_{beta_t}) <= max(2, chi_square(f_0, mu_{beta_0})) on a
// periodic run, checked at every checkpoint.
inline BoundReport verify_chi_square_bound(const FpRunResult& run, const Potential& p) {
    if (run.final_state.boundary != FpBoundary::periodic)
        throw std::invalid_argument("verify_chi_square_bound: periodic runs only");
    BoundReport rep;
    for (const auto& cp : run.checkpoints)
        rep.trajectory.push_back(detail::grid_chi_square(cp, run.final_state, p, cp.beta));
    rep.bound = std::max(2.0, rep.trajectory.front());
    rep.max_value = *std::max_element(rep.trajectory.begin(), rep.trajectory.end());
    rep.max_ratio = rep.max_value / rep.bound;
    rep.holds = rep.max_value <= rep.bound;
    return rep;
}

// slack of the integrated entropy inequality h_t <= h_0 + int beta' u ds,
// evaluated on the checkpoint grid by the trapezoid rule; returns the largest
// violation (positive means the inequality failed by that much)
inline double entropy_inequality_slack(const FpRunResult& run, const CoolingSchedule& s) {
    double worst = -std::numeric_limits<double>::infinity();
    double integral = 0.0;
    const auto& cps = run.checkpoints;
    for (std::size_t k = 1; k < cps.size(); ++k) {
        double a = s.beta_prime(cps[k - 1].t) * cps[k - 1].u;
        double b = s.beta_prime(cps[k].t) * cps[k].u;
        integral += 0.5 * (a + b) * (cps[k].t - cps[k - 1].t);
        worst = std::max(worst, cps[k].kappa - cps.front().kappa - integral);
    }
    return worst;
}

} // namespace anneal
