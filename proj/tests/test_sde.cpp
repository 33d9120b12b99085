#include <anneal/builtins.hpp>
#include <anneal/sde.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace anneal;

TEST_CASE("step performs one Euler-Maruyama increment") {
    Potential p = make_quadratic(1);
    CoolingSchedule s(1e6, 2.0);  // frozen at beta = 2
    std::vector<double> x{1.0}, noise{0.5};
    auto y = step(p, s, x, 0.0, 0.01, noise);
    // x + sqrt(dt)*xi - 0.5*beta*x*dt
    REQUIRE(y[0] == Catch::Approx(1.0 + 0.1 * 0.5 - 0.5 * 2.0 * 1.0 * 0.01).epsilon(1e-14));
    REQUIRE_THROWS_AS(step(p, s, x, 0.0, 0.0, noise), std::invalid_argument);
    std::vector<double> bad_noise{0.5, 0.1};
    REQUIRE_THROWS_AS(step(p, s, x, 0.0, 0.01, bad_noise), std::invalid_argument);
}

TEST_CASE("step policy limits drift displacement") {
    StepPolicy pol;
    pol.dt_max = 1e-2;
    pol.drift_cap = 0.1;
    REQUIRE(pol.dt_at(2.0, 0.0, 1.0) == 1e-2);
    // drift = 0.5*beta*|grad| = 50 -> dt = 0.1/50
    REQUIRE(pol.dt_at(10.0, 10.0, 1.0) == Catch::Approx(0.002));
    pol.relative = true;
    pol.dt_max = 1.0;
    // cap scales with |x|: cap = 0.1*(1+9) = 1, drift = 50
    REQUIRE(pol.dt_at(10.0, 10.0, 9.0) == Catch::Approx(0.1 * 10.0 / 50.0));
}

TEST_CASE("trajectories are deterministic in seed and stream") {
    Potential p = make_double_well_1d();
    CoolingSchedule s(2.0, 0.5);
    StepPolicy pol;
    StopConditions stop;
    std::vector<double> x0{-1.0};
    auto a = simulate(p, s, x0, 10.0, pol, stop, 99, 5, {1.0, 5.0, 10.0});
    auto b = simulate(p, s, x0, 10.0, pol, stop, 99, 5, {1.0, 5.0, 10.0});
    auto c = simulate(p, s, x0, 10.0, pol, stop, 99, 6, {1.0, 5.0, 10.0});
    REQUIRE(a.positions == b.positions);
    REQUIRE(a.steps == b.steps);
    REQUIRE(a.positions != c.positions);
}

TEST_CASE("checkpoints are recorded at the requested times") {
    Potential p = make_quadratic(1);
    CoolingSchedule s(1.0, 1.0);
    auto tr = simulate(p, s, std::vector<double>{0.5}, 8.0, {}, {}, 7, 0, {2.0, 4.0, 8.0});
    REQUIRE(tr.times.size() == 3);
    REQUIRE(tr.times[0] == Catch::Approx(2.0).margin(1e-9));
    REQUIRE(tr.times[1] == Catch::Approx(4.0).margin(1e-9));
    REQUIRE(tr.times[2] == Catch::Approx(8.0).margin(1e-9));
    REQUIRE(tr.status == TrajStatus::completed);
    REQUIRE(tr.u_values.size() == 3);
}

TEST_CASE("OU stationary variance at frozen temperature") {
    // dX = -0.5*beta*X dt + dB has stationary variance 1/beta
    Potential p = make_quadratic(1);
    CoolingSchedule s(1e6, 2.0);
    StepPolicy pol;
    const int n = 4000;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        auto tr = simulate(p, s, std::vector<double>{0.0}, 15.0, pol, {}, 1234, i);
        double x = tr.positions.back()[0];
        s2 += x * x;
    }
    double var = s2 / n;
    REQUIRE(var == Catch::Approx(0.5).margin(0.035));  // 1/beta with MC + O(dt) bias slack
}

TEST_CASE("exit radii record first hitting times in order") {
    Potential p = make_quadratic(1);
    CoolingSchedule s(1e6, 0.1);
    StopConditions stop;
    stop.exit_radii = {0.5, 1.0};
    auto tr = simulate(p, s, std::vector<double>{0.0}, 50.0, {}, stop, 4, 2);
    REQUIRE(tr.exit_times.size() >= 1);
    double prev = 0.0;
    for (auto& [r, t] : tr.exit_times) {
        REQUIRE(t >= prev);
        prev = t;
    }
}

TEST_CASE("explosive drift triggers the explosion status quickly") {
    Potential p = make_explosive_alpha(1.5);
    CoolingSchedule s(1e6, 1.0);
    StepPolicy pol;
    pol.relative = true;
    pol.dt_min = 1e-16;
    StopConditions stop;
    stop.explosion_radius = 1e60;
    int exploded = 0;
    for (int i = 0; i < 20; ++i) {
        auto tr = simulate(p, s, std::vector<double>{1.0}, 10.0, pol, stop, 31, i);
        if (tr.status == TrajStatus::exploded) {
            ++exploded;
            REQUIRE(tr.explode_time <= 10.0);
        }
    }
    REQUIRE(exploded >= 18);
}

TEST_CASE("torus simulation stays inside the fundamental domain") {
    TorusSpec ts = make_torus(make_double_well_1d(), 2.0, 2.6);
    CoolingSchedule s(2.0, 0.5);
    auto tr = simulate_torus(ts, s, std::vector<double>{0.0}, 20.0, {}, 11, 0,
                             {5.0, 10.0, 20.0});
    REQUIRE(tr.status == TrajStatus::completed);
    for (const auto& x : tr.positions) {
        REQUIRE(x[0] >= -2.6);
        REQUIRE(x[0] < 2.6);
    }
    std::vector<double> outside{3.0};
    REQUIRE_THROWS_AS(simulate_torus(ts, s, outside, 1.0, {}, 11), std::invalid_argument);
}

TEST_CASE("invalid starts are rejected") {
    Potential p = make_quadratic(1);
    CoolingSchedule s(1.0, 1.0);
    std::vector<double> nan_x{std::nan("")};
    REQUIRE_THROWS_AS(simulate(p, s, nan_x, 1.0, {}, {}, 0), std::invalid_argument);
    auto tr = simulate(p, s, std::vector<double>{0.0}, -1.0, {}, {}, 0);
    REQUIRE(tr.status == TrajStatus::error);
}
