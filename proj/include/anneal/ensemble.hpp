#pragma once

#include "anneal/builtins.hpp"
#include "anneal/potential.hpp"
#include "anneal/rng.hpp"
#include "anneal/schedule.hpp"
#include "anneal/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace anneal {

struct WilsonInterval {
    double lo, hi;
};

// 95% Wilson score interval for k successes out of n
inline WilsonInterval wilson_interval(std::size_t k, std::size_t n) {
    if (n == 0) throw std::invalid_argument("wilson_interval: n must be > 0");
    const double z = 1.959963984540054;
    double p = static_cast<double>(k) / n;
    double z2n = z * z / n;
    double denom = 1.0 + z2n;
    double center = (p + 0.5 * z2n) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + 0.25 * z2n / n) / denom;
    // rounding can leave a stray ulp at the degenerate edges
    double lo = k == 0 ? 0.0 : std::max(0.0, center - half);
    double hi = k == n ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

namespace detail {

// static partition would also be deterministic, but work stealing balances
// uneven path costs; determinism holds because results land at their index
template <class F>
void parallel_for(std::size_t n, int workers, F&& body) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    int count = std::min<int>(workers, static_cast<int>(n));
    pool.reserve(count);
    for (int w = 0; w < count; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace detail

struct PathRecord {
    std::vector<double> u_at_checkpoints;
    double sup_u = 0.0;
    double sup_abs = 0.0;
    TrajStatus status = TrajStatus::completed;
    double explode_time = 0.0;
};

struct CheckpointEstimate {
    double t;
    std::size_t exceed_count;  // paths with U(X_t) > eps
    double p;
    WilsonInterval interval;
};

struct EnsembleStats {
    std::string experiment_id;
    std::size_t N = 0;
    std::uint64_t seed = 0;
    double eps = 0.0;
    std::vector<double> checkpoint_times;
    std::vector<CheckpointEstimate> exceed;  // P(U(X_t) > eps) per checkpoint
    std::size_t errors = 0;
    std::size_t exploded = 0;
    std::vector<PathRecord> paths;

    double final_success() const { return 1.0 - exceed.back().p; }
};

inline StepPolicy default_step_policy() { return StepPolicy{}; }

inline std::vector<double> log_spaced_checkpoints(double horizon, int count = 6) {
    std::vector<double> cps;
    for (int k = 0; k < count; ++k)
        cps.push_back(std::pow(horizon, (k + 1.0) / count));
    cps.back() = horizon;
    return cps;
}

// Annealing success experiment: N independent paths with c = multiplier * c*,
// reporting P(U(X_t) > eps) at the checkpoints. Deterministic in (seed, N)
// for any worker count: path i always consumes noise stream i.
inline EnsembleStats run_success_experiment(const Potential& p, double multiplier, double beta0,
                                            const std::vector<double>& x0, double eps,
                                            double horizon, std::size_t N, std::uint64_t seed,
                                            std::vector<double> checkpoints = {},
                                            const StepPolicy& policy = {}, int workers = 0,
                                            double c_floor = 0.5) {
    if (N < 100) throw std::invalid_argument("run_success_experiment: N must be >= 100");
    if (!p.known_c_star)
        throw std::invalid_argument("run_success_experiment: potential has no c_star");
    double cs = *p.known_c_star;
    double c = multiplier * (cs > 0.0 ? cs : c_floor);
    CoolingSchedule sched(c, beta0);
    if (checkpoints.empty()) checkpoints = log_spaced_checkpoints(horizon);
    std::sort(checkpoints.begin(), checkpoints.end());
    if (checkpoints.back() < horizon) checkpoints.push_back(horizon);

    EnsembleStats st;
    st.experiment_id = "success:" + p.name;
    st.N = N;
    st.seed = seed;
    st.eps = eps;
    st.checkpoint_times = checkpoints;
    st.paths.resize(N);
    StopConditions stop;

    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    detail::parallel_for(N, workers, [&](std::size_t i) {
        Trajectory tr = simulate(p, sched, x0, horizon, policy, stop, seed, i, checkpoints);
        PathRecord& rec = st.paths[i];
        rec.status = tr.status;
        rec.sup_u = tr.sup_u;
        rec.sup_abs = tr.sup_abs;
        rec.explode_time = tr.explode_time;
        if (tr.status == TrajStatus::completed) rec.u_at_checkpoints = tr.u_values;
    });

    for (const auto& rec : st.paths) {
        if (rec.status == TrajStatus::error) ++st.errors;
        if (rec.status == TrajStatus::exploded) ++st.exploded;
    }
    std::size_t bad = st.errors + st.exploded;
    if (bad * 100 > N)
        throw std::runtime_error("run_success_experiment: failed path budget exceeded (" +
                                 std::to_string(bad) + "/" + std::to_string(N) + ")");
    std::size_t good = N - bad;
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
        std::size_t count = 0;
        for (const auto& rec : st.paths)
            if (rec.status == TrajStatus::completed && rec.u_at_checkpoints[k] > eps) ++count;
        CheckpointEstimate est;
        est.t = checkpoints[k];
        est.exceed_count = count;
        est.p = static_cast<double>(count) / good;
        est.interval = wilson_interval(count, good);
        st.exceed.push_back(est);
    }
    return st;
}

struct AbsorptionResult {
    double A, K, beta0, c;
    std::size_t N;
    std::uint64_t seed;
    std::size_t bounded_count;  // paths with sup_{t<=T} U <= K
    double p;
    WilsonInterval interval;
    std::vector<double> sup_u;  // per path
};

// P(sup_{t<=T} U(X_t) <= K) with starting points drawn uniformly (rejection
// from the box) inside the sublevel set {U <= A}.
inline AbsorptionResult run_absorption_experiment(const Potential& p, double A, double K,
                                                  double beta0, double c, std::size_t N,
                                                  double horizon, std::uint64_t seed,
                                                  const std::vector<double>& box_lo,
                                                  const std::vector<double>& box_hi,
                                                  const StepPolicy& policy = {},
                                                  int workers = 0) {
    if (N < 50) throw std::invalid_argument("run_absorption_experiment: N must be >= 50");
    if (!(K > 0.0 && A > 0.0)) throw std::invalid_argument("run_absorption_experiment: A,K > 0");
    CoolingSchedule sched(c, beta0);
    AbsorptionResult res{A, K, beta0, c, N, seed, 0, 0.0, {0, 0}, std::vector<double>(N)};
    StopConditions stop;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    constexpr std::uint64_t sample_stream_base = 1ull << 32;
    detail::parallel_for(N, workers, [&](std::size_t i) {
        CounterRng rng(seed, sample_stream_base + i);
        std::vector<double> x0(p.dim);
        bool found = false;
        for (int attempt = 0; attempt < 100000 && !found; ++attempt) {
            for (int a = 0; a < p.dim; ++a)
                x0[a] = box_lo[a] + (box_hi[a] - box_lo[a]) * rng.next_double();
            found = p.value(x0) <= A;
        }
        if (!found) {
            // rejection stalled: count the path as unbounded rather than
            // aborting the whole ensemble from a worker thread
            res.sup_u[i] = std::numeric_limits<double>::infinity();
            return;
        }
        Trajectory tr = simulate(p, sched, x0, horizon, policy, stop, seed, i);
        res.sup_u[i] = tr.status == TrajStatus::completed
                           ? tr.sup_u
                           : std::numeric_limits<double>::infinity();
    });
    for (double s : res.sup_u)
        if (s <= K) ++res.bounded_count;
    res.p = static_cast<double>(res.bounded_count) / N;
    res.interval = wilson_interval(res.bounded_count, N);
    return res;
}

struct ExplosionRow {
    double alpha;
    std::size_t exploded;
    std::size_t errors;
    double fraction;
    WilsonInterval interval;
    double mean_explode_time;  // over exploded paths, 0 if none
};

// Explosion dichotomy for U = -(1+|x|^2)^alpha at constant temperature. The
// relative step policy shortens dt proportionally to |x|, so runaway paths
// reach the (very large) explosion radius in O(log R) steps.
inline std::vector<ExplosionRow> run_explosion_experiment(
    const std::vector<double>& alphas, const std::vector<double>& x0, double beta_const,
    double horizon, double R_explode, std::size_t N, std::uint64_t seed, int workers = 0) {
    if (!(R_explode >= 1e4))
        throw std::invalid_argument("run_explosion_experiment: R_explode must be >= 1e4");
    if (N < 50) throw std::invalid_argument("run_explosion_experiment: N must be >= 50");
    // c huge freezes the schedule at beta0
    CoolingSchedule sched(1e6, beta_const);
    StepPolicy policy;
    policy.relative = true;
    policy.dt_min = 1e-16;
    StopConditions stop;
    stop.explosion_radius = R_explode;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());

    std::vector<ExplosionRow> table;
    for (double alpha : alphas) {
        Potential p = make_explosive_alpha(alpha, static_cast<int>(x0.size()));
        std::vector<char> exploded(N, 0), errored(N, 0);
        std::vector<double> t_explode(N, 0.0);
        detail::parallel_for(N, workers, [&](std::size_t i) {
            Trajectory tr = simulate(p, sched, x0, horizon, policy, stop, seed, i);
            if (tr.status == TrajStatus::exploded) {
                exploded[i] = 1;
                t_explode[i] = tr.explode_time;
            } else if (tr.status == TrajStatus::error) {
                errored[i] = 1;
            }
        });
        ExplosionRow row{alpha, 0, 0, 0.0, {0, 0}, 0.0};
        double tsum = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            if (exploded[i]) {
                ++row.exploded;
                tsum += t_explode[i];
            }
            if (errored[i]) ++row.errors;
        }
        row.fraction = static_cast<double>(row.exploded) / N;
        row.interval = wilson_interval(row.exploded, N);
        if (row.exploded > 0) row.mean_explode_time = tsum / row.exploded;
        table.push_back(row);
    }
    return table;
}

struct PhaseSweepRow {
    double multiplier;
    double c;
    double success;  // 1 - P(U(X_T) > eps)
    WilsonInterval interval;
    EnsembleStats stats;
};

struct PhaseSweepResult {
    std::vector<PhaseSweepRow> rows;
    bool monotone_within_2se = true;
    std::vector<std::string> violations;
};

// Phase transition sweep across schedule multipliers with common random
// numbers: every multiplier reuses the same master seed, so path i sees the
// same Brownian draws in each column.
inline PhaseSweepResult run_phase_sweep(const Potential& p,
                                        const std::vector<double>& multipliers, double beta0,
                                        const std::vector<double>& x0, double eps,
                                        double horizon, std::size_t N, std::uint64_t seed,
                                        std::vector<double> checkpoints = {},
                                        const StepPolicy& policy = {}, int workers = 0,
                                        double c_floor = 0.5) {
    if (multipliers.size() < 2)
        throw std::invalid_argument("run_phase_sweep: need >= 2 multipliers");
    PhaseSweepResult res;
    for (double mult : multipliers) {
        EnsembleStats st = run_success_experiment(p, mult, beta0, x0, eps, horizon, N, seed,
                                                  checkpoints, policy, workers, c_floor);
        double cs = p.known_c_star.value_or(0.0);
        PhaseSweepRow row{mult, mult * (cs > 0.0 ? cs : c_floor), st.final_success(),
                          wilson_interval(st.N - st.exceed.back().exceed_count -
                                              st.errors - st.exploded,
                                          st.N - st.errors - st.exploded),
                          std::move(st)};
        res.rows.push_back(std::move(row));
    }
    // ordering diagnostic: allow 2 pooled standard errors of slack
    for (std::size_t k = 1; k < res.rows.size(); ++k) {
        const auto& a = res.rows[k - 1];
        const auto& b = res.rows[k];
        double n = static_cast<double>(N);
        double se = std::sqrt(a.success * (1.0 - a.success) / n +
                              b.success * (1.0 - b.success) / n);
        if (b.success < a.success - 2.0 * se) {
            res.monotone_within_2se = false;
            res.violations.push_back("success(" + std::to_string(b.multiplier) + ") < success(" +
                                     std::to_string(a.multiplier) + ") - 2se");
        }
    }
    return res;
}

} // namespace anneal
