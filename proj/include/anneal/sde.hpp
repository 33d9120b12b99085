#pragma once

#include "anneal/potential.hpp"
#include "anneal/rng.hpp"
#include "anneal/schedule.hpp"
#include "anneal/torus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace anneal {

// Adaptive Euler-Maruyama step control. The drift displacement of one step is
// bounded by drift_cap (absolute), or by drift_cap*(1+|x|) when relative=true;
// the relative mode traverses blow-up trajectories in O(log radius) steps.
struct StepPolicy {
    double dt_max = 1e-2;
    double dt_min = 1e-12;
    double drift_cap = 0.1;
    bool relative = false;

    double dt_at(double beta, double grad_norm, double x_norm) const {
        double cap = relative ? drift_cap * (1.0 + x_norm) : drift_cap;
        double drift = 0.5 * beta * grad_norm;
        double dt = dt_max;
        if (drift * dt > cap) dt = cap / drift;
        return dt;
    }
};

struct StopConditions {
    double explosion_radius = 1e6;
    std::vector<double> exit_radii;  // record first hitting time of |X| >= r
};

enum class TrajStatus { completed, exploded, error };

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> positions;
    std::vector<double> u_values;
    double sup_u = -std::numeric_limits<double>::infinity();
    double sup_abs = 0.0;
    std::vector<std::pair<double, double>> exit_times;  // (radius, first time)
    TrajStatus status = TrajStatus::completed;
    double explode_time = 0.0;
    std::string error_msg;
    std::uint64_t steps = 0;
};

// One Euler-Maruyama increment: x' = x + sqrt(dt)*noise - 0.5*beta(t)*grad U(x)*dt
inline std::vector<double> step(const Potential& p, const CoolingSchedule& s,
                                std::span<const double> x, double t, double dt,
                                std::span<const double> noise) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    if (noise.size() != x.size()) throw std::invalid_argument("step: noise dimension mismatch");
    std::vector<double> g(x.size());
    p.gradient(x, g);
    for (double v : g)
        if (!std::isfinite(v))
            throw std::runtime_error("step: non-finite gradient at t=" + std::to_string(t));
    double b = s.beta(t);
    double sq = std::sqrt(dt);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] + sq * noise[i] - 0.5 * b * g[i] * dt;
    return out;
}

namespace detail {

inline double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

struct SimOptions {
    bool torus = false;
    double torus_L = 0.0;
};

inline Trajectory simulate_impl(const Potential& p, const CoolingSchedule& s,
                                std::span<const double> x0, double horizon,
                                const StepPolicy& policy, const StopConditions& stop,
                                std::uint64_t master_seed, std::uint64_t stream,
                                std::vector<double> checkpoints, const SimOptions& opt) {
    const int d = p.dim;
    Trajectory tr;
    if (!(horizon > 0.0)) {
        tr.status = TrajStatus::error;
        tr.error_msg = "horizon must be > 0";
        return tr;
    }
    std::sort(checkpoints.begin(), checkpoints.end());
    if (checkpoints.empty() || checkpoints.back() < horizon) checkpoints.push_back(horizon);

    CounterRng rng(master_seed, stream);
    std::vector<double> x(x0.begin(), x0.end()), g(d), noise(d);
    std::vector<double> radii(stop.exit_radii);
    std::sort(radii.begin(), radii.end());
    std::size_t next_radius = 0;

    double t = 0.0;
    std::size_t ci = 0;

    auto observe = [&](bool record) {
        double u = p.value(x);
        double r = norm(x);
        tr.sup_u = std::max(tr.sup_u, u);
        tr.sup_abs = std::max(tr.sup_abs, r);
        while (next_radius < radii.size() && r >= radii[next_radius]) {
            tr.exit_times.emplace_back(radii[next_radius], t);
            ++next_radius;
        }
        if (record) {
            tr.times.push_back(t);
            tr.positions.push_back(x);
            tr.u_values.push_back(u);
        }
        return r;
    };
    observe(false);

    while (t < horizon) {
        p.gradient(x, g);
        double gn = 0.0;
        bool finite = true;
        for (double v : g) {
            finite = finite && std::isfinite(v);
            gn += v * v;
        }
        if (!finite) {
            tr.status = TrajStatus::error;
            tr.error_msg = "non-finite gradient at t=" + std::to_string(t);
            return tr;
        }
        gn = std::sqrt(gn);
        double b = s.beta(t);
        double dt = policy.dt_at(b, gn, detail::norm(x));
        if (dt < policy.dt_min) {
            // in relative mode the cap shrinks dt like 1/|x| along blow-up
            // trajectories, so underflow is the expected endgame there; the
            // clamped steps still multiply |x| until the radius check fires
            if (policy.relative) {
                dt = policy.dt_min;
            } else {
                tr.status = TrajStatus::error;
                tr.error_msg = "step underflow: dt=" + std::to_string(dt) +
                               " at t=" + std::to_string(t);
                return tr;
            }
        }
        if (tr.steps >= 100000000ull) {
            tr.status = TrajStatus::error;
            tr.error_msg = "step budget exceeded at t=" + std::to_string(t);
            return tr;
        }
        double target = ci < checkpoints.size() ? checkpoints[ci] : horizon;
        if (t + dt > target) dt = target - t;
        double sq = std::sqrt(dt);
        for (int i = 0; i < d; ++i) {
            noise[i] = rng.next_normal();
            x[i] += sq * noise[i] - 0.5 * b * g[i] * dt;
        }
        if (opt.torus) wrap_point(x, opt.torus_L);
        t += dt;
        ++tr.steps;

        bool at_checkpoint = ci < checkpoints.size() && t >= checkpoints[ci] - 1e-12;
        double r = observe(at_checkpoint);
        if (at_checkpoint) ++ci;

        if (!opt.torus && r >= stop.explosion_radius) {
            tr.status = TrajStatus::exploded;
            tr.explode_time = t;
            return tr;
        }
        if (!std::isfinite(r)) {
            tr.status = TrajStatus::error;
            tr.error_msg = "non-finite state at t=" + std::to_string(t);
            return tr;
        }
    }
    tr.status = TrajStatus::completed;
    return tr;
}

} // namespace detail

// Deterministic function of all inputs: the noise stream is derived from
// (master_seed, stream) only.
inline Trajectory simulate(const Potential& p, const CoolingSchedule& s,
                           std::span<const double> x0, double horizon,
                           const StepPolicy& policy, const StopConditions& stop,
                           std::uint64_t master_seed, std::uint64_t stream = 0,
                           std::vector<double> checkpoints = {}) {
    for (double v : x0)
        if (!std::isfinite(v)) throw std::invalid_argument("simulate: x0 must be finite");
    return detail::simulate_impl(p, s, x0, horizon, policy, stop, master_seed, stream,
                                 std::move(checkpoints), {});
}

// Torus dynamics: positions stay in [-L, L)^d, no explosion possible.
inline Trajectory simulate_torus(const TorusSpec& ts, const CoolingSchedule& s,
                                 std::span<const double> x0, double horizon,
                                 const StepPolicy& policy,
                                 std::uint64_t master_seed, std::uint64_t stream = 0,
                                 std::vector<double> checkpoints = {}) {
    for (double v : x0)
        if (!(v >= -ts.L && v < ts.L))
            throw std::invalid_argument("simulate_torus: x0 outside fundamental domain");
    detail::SimOptions opt;
    opt.torus = true;
    opt.torus_L = ts.L;
    StopConditions stop;
    stop.explosion_radius = std::numeric_limits<double>::infinity();
    return detail::simulate_impl(ts.capped, s, x0, horizon, policy, stop, master_seed,
                                 stream, std::move(checkpoints), opt);
}

} // namespace anneal
