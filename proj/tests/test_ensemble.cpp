#include <anneal/builtins.hpp>
#include <anneal/ensemble.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace anneal;

TEST_CASE("Wilson intervals bracket the point estimate") {
    auto w = wilson_interval(30, 100);
    REQUIRE(w.lo < 0.3);
    REQUIRE(w.hi > 0.3);
    REQUIRE(wilson_interval(0, 50).lo == 0.0);
    REQUIRE(wilson_interval(50, 50).hi == 1.0);
    REQUIRE_THROWS_AS(wilson_interval(1, 0), std::invalid_argument);
}

TEST_CASE("Wilson coverage calibration at p = 0.3") {
    // 1000 synthetic Bernoulli ensembles of size 100
    CounterRng rng(555, 0);
    int covered = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        std::size_t k = 0;
        for (int i = 0; i < 100; ++i)
            if (rng.next_double() < 0.3) ++k;
        auto w = wilson_interval(k, 100);
        if (w.lo <= 0.3 && 0.3 <= w.hi) ++covered;
    }
    REQUIRE(covered >= 930);
}

TEST_CASE("single well anneals to the bottom") {
    Potential p = make_quadratic(1);
    EnsembleStats st = run_success_experiment(p, 0.5, 0.5, {2.0}, 0.1, 1e3, 500, 2024,
                                              {10.0, 100.0, 1e3});
    REQUIRE(st.errors == 0);
    REQUIRE(st.exceed.back().p < 0.05);
    REQUIRE(st.final_success() > 0.95);
    for (const auto& est : st.exceed) {
        REQUIRE(est.interval.lo <= est.p);
        REQUIRE(est.p <= est.interval.hi);
    }
}

TEST_CASE("ensembles are identical across worker counts") {
    Potential p = make_tilted_double_well_1d(0.5);
    auto run = [&](int workers) {
        return run_success_experiment(p, 2.0, 0.5, {0.93040293}, 0.2, 50.0, 100, 99,
                                      {10.0, 50.0}, {}, workers);
    };
    EnsembleStats a = run(1), b = run(3), c = run(8);
    REQUIRE(a.paths.size() == b.paths.size());
    for (std::size_t i = 0; i < a.paths.size(); ++i) {
        REQUIRE(a.paths[i].u_at_checkpoints == b.paths[i].u_at_checkpoints);
        REQUIRE(a.paths[i].u_at_checkpoints == c.paths[i].u_at_checkpoints);
        REQUIRE(a.paths[i].sup_u == b.paths[i].sup_u);
    }
    for (std::size_t k = 0; k < a.exceed.size(); ++k)
        REQUIRE(a.exceed[k].exceed_count == b.exceed[k].exceed_count);
}

TEST_CASE("absorption probability behaves monotonically path-wise") {
    Potential p = make_double_well_1d();
    AbsorptionResult res = run_absorption_experiment(p, 0.5, 2.0, 8.0, 2.0, 100, 100.0, 7,
                                                     {-2.0}, {2.0});
    REQUIRE(res.p >= 0.0);
    REQUIRE(res.p <= 1.0);
    REQUIRE(res.interval.lo <= res.p);
    // recompute the estimate at larger K from the same sup records:
    // non-decreasing in K by construction
    auto frac_below = [&](double K) {
        std::size_t c = 0;
        for (double s : res.sup_u)
            if (s <= K) ++c;
        return static_cast<double>(c) / res.sup_u.size();
    };
    REQUIRE(frac_below(3.0) >= frac_below(2.0));
    REQUIRE(frac_below(2.0) >= frac_below(1.0));
}

TEST_CASE("a cold start is absorbed more often than a hot one") {
    Potential p = make_double_well_1d();
    auto cold = run_absorption_experiment(p, 0.5, 1.5, 8.0, 2.0, 200, 100.0, 11, {-2.0}, {2.0});
    auto hot = run_absorption_experiment(p, 0.5, 1.5, 1.0, 2.0, 200, 100.0, 11, {-2.0}, {2.0});
    double se = std::sqrt(cold.p * (1 - cold.p) / 200.0 + hot.p * (1 - hot.p) / 200.0);
    REQUIRE(cold.p >= hot.p - 2.0 * se);
}

TEST_CASE("sublevel sweep of K finds the absorption threshold") {
    Potential p = make_double_well_1d();
    // one ensemble, thresholds evaluated on the shared sup records
    AbsorptionResult res = run_absorption_experiment(p, 0.5, 10.0, 8.0, 2.0, 200, 100.0, 13,
                                                     {-2.0}, {2.0});
    double k_half = -1.0;
    for (double K = 0.25; K <= 10.0; K += 0.25) {
        std::size_t c = 0;
        for (double s : res.sup_u)
            if (s <= K) ++c;
        if (c >= res.sup_u.size() / 2) {
            k_half = K;
            break;
        }
    }
    REQUIRE(k_half > 0.0);  // the paper guarantees such a K exists
}

TEST_CASE("explosion dichotomy at small scale") {
    auto table = run_explosion_experiment({0.5, 1.0, 1.5}, {1.0}, 1.0, 10.0, 1e60, 100, 31);
    REQUIRE(table.size() == 3);
    REQUIRE(table[0].fraction == 0.0);
    REQUIRE(table[1].fraction == 0.0);
    REQUIRE(table[2].fraction >= 0.9);
    REQUIRE(table[2].mean_explode_time > 0.0);
    REQUIRE(table[2].mean_explode_time < 10.0);
    REQUIRE_THROWS_AS(run_explosion_experiment({1.5}, {1.0}, 1.0, 1.0, 100.0, 100, 1),
                      std::invalid_argument);
}

TEST_CASE("phase sweep reuses common random numbers") {
    Potential p = make_tilted_double_well_1d(0.5);
    PhaseSweepResult res = run_phase_sweep(p, {0.5, 3.0}, 0.5, {0.93040293}, 0.7, 200.0, 100,
                                           42, {50.0, 200.0});
    REQUIRE(res.rows.size() == 2);
    REQUIRE(res.rows[0].c == Catch::Approx(0.5 * 0.548250657846204));
    // CRN: rerunning one multiplier standalone reproduces its column exactly
    EnsembleStats solo = run_success_experiment(p, 3.0, 0.5, {0.93040293}, 0.7, 200.0, 100,
                                                42, {50.0, 200.0});
    REQUIRE(res.rows[1].stats.exceed.back().exceed_count == solo.exceed.back().exceed_count);
    for (std::size_t i = 0; i < 100; ++i)
        REQUIRE(res.rows[1].stats.paths[i].u_at_checkpoints == solo.paths[i].u_at_checkpoints);
    REQUIRE_THROWS_AS(run_phase_sweep(p, {1.0}, 0.5, {0.9}, 0.7, 10.0, 100, 1),
                      std::invalid_argument);
}

TEST_CASE("flat control profile for the single well") {
    // eps generous enough that even the slowest-cooling column has equilibrated
    Potential p = make_quadratic(1);
    PhaseSweepResult res = run_phase_sweep(p, {0.3, 2.0}, 0.5, {1.5}, 1.0, 1000.0, 150, 8,
                                           {100.0, 1000.0});
    REQUIRE(res.monotone_within_2se);
    for (const auto& row : res.rows) REQUIRE(row.success > 0.9);
}

TEST_CASE("preconditions") {
    Potential p = make_quadratic(1);
    REQUIRE_THROWS_AS(run_success_experiment(p, 1.0, 0.5, {0.0}, 0.1, 10.0, 50, 1),
                      std::invalid_argument);
    Potential nostar = make_loglog(4.0, 1);
    REQUIRE_THROWS_AS(run_success_experiment(nostar, 1.0, 0.5, {0.0}, 0.1, 10.0, 200, 1),
                      std::invalid_argument);
}
