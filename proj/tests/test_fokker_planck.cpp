#include <anneal/builtins.hpp>
#include <anneal/fokker_planck.hpp>
#include <anneal/gibbs.hpp>
#include <anneal/torus.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace anneal;

TEST_CASE("discrete Gibbs state is stationary at constant beta") {
    Potential p = make_double_well_1d();
    DensityGrid dg = DensityGrid::gibbs(p, 4.0, -2.0, 2.0, 200, FpBoundary::no_flux);
    CoolingSchedule frozen(1e6, 4.0);
    FpRunResult run = evolve(dg, p, frozen, 1.0, 1e-4);
    REQUIRE(run.steps >= 9999);
    REQUIRE(run.steps <= 10001);
    double worst = 0.0;
    for (int i = 0; i < dg.n(); ++i)
        worst = std::max(worst, std::abs(run.final_state.f[i] - dg.f[i]));
    REQUIRE(worst <= 1e-10);
    REQUIRE(std::abs(run.final_state.mass() - 1.0) <= 1e-12);
}

TEST_CASE("heat equation flattens toward uniform on a no-flux box") {
    nlohmann::json zero = {{"type", "polynomial"}, {"coeffs", {0.0}}};
    Potential p = potential_from_config(zero);
    DensityGrid dg = DensityGrid::from_function(-1.0, 1.0, 100, FpBoundary::no_flux,
                                                [](double x) { return x < 0.0 ? 2.0 : 0.5; });
    CoolingSchedule frozen(1e6, 1.0);
    // slowest mode decays at (pi/2)^2/2 per unit time; T = 6 leaves ~6e-4
    FpRunResult run = evolve(dg, p, frozen, 6.0, 1e-4, {0.1, 0.5, 2.0, 6.0});
    // profile variance decreases checkpoint to checkpoint
    auto variance = [](const std::vector<double>& f) {
        double m = 0.0;
        for (double v : f) m += v;
        m /= f.size();
        double s = 0.0;
        for (double v : f) s += (v - m) * (v - m);
        return s / f.size();
    };
    double prev = variance(run.checkpoints.front().f);
    for (std::size_t k = 1; k < run.checkpoints.size(); ++k) {
        double cur = variance(run.checkpoints[k].f);
        REQUIRE(cur < prev);
        prev = cur;
    }
    // long-time limit is uniform 1/(2L) = 0.5
    for (double v : run.final_state.f) REQUIRE(v == Catch::Approx(0.5).margin(1e-3));
}

TEST_CASE("mass is conserved at every checkpoint of an annealing run") {
    Potential p = make_double_well_1d();
    DensityGrid dg = DensityGrid::gibbs(p, 0.5, -2.6, 2.6, 260, FpBoundary::periodic);
    CoolingSchedule s(2.0, 0.5);
    FpRunResult run = evolve(dg, p, s, 5.0, 5e-5, {1.0, 2.0, 5.0});
    for (const auto& cp : run.checkpoints)
        REQUIRE(std::abs(cp.mass - 1.0) <= 1e-12);
}

TEST_CASE("moment_U closed forms") {
    Potential q = make_quadratic(1);
    DensityGrid dg = DensityGrid::gibbs(q, 4.0, -6.0, 6.0, 1200, FpBoundary::no_flux);
    // Gaussian equipartition: E[U] = 1/(2 beta)
    REQUIRE(moment_U(dg, q) == Catch::Approx(1.0 / 8.0).margin(1e-5));

    Potential dw = make_double_well_1d();
    DensityGrid uni = DensityGrid::from_function(-2.0, 2.0, 4000, FpBoundary::no_flux,
                                                 [](double) { return 1.0; });
    // (1/4) int_{-2}^{2} (x^2-1)^2 dx = 23/15
    REQUIRE(moment_U(uni, dw) == Catch::Approx(23.0 / 15.0).margin(1e-5));
}

TEST_CASE("entropy kappa closed form and overflow guard") {
    nlohmann::json zero = {{"type", "polynomial"}, {"coeffs", {0.0}}};
    Potential p = potential_from_config(zero);
    const double L = 2.0;
    DensityGrid uni = DensityGrid::from_function(-L, L, 500, FpBoundary::no_flux,
                                                 [](double) { return 1.0; });
    REQUIRE(entropy_kappa(uni, p, 1.0) ==
            Catch::Approx(std::log1p(1.0 / (2.0 * L))).margin(1e-12));

    // huge beta*U must not overflow: kappa ~ beta * E[U] + entropy-ish terms
    Potential q = make_quadratic(1);
    DensityGrid g = DensityGrid::gibbs(q, 2.0, -6.0, 6.0, 400, FpBoundary::no_flux);
    double k = entropy_kappa(g, q, 500.0);
    REQUIRE(std::isfinite(k));
    REQUIRE(k > 0.0);
}

TEST_CASE("empty cells contribute nothing to kappa") {
    Potential q = make_quadratic(1);
    DensityGrid g = DensityGrid::from_function(-2.0, 2.0, 100, FpBoundary::no_flux,
                                               [](double x) { return x > 0.0 ? 1.0 : 0.0; });
    DensityGrid full = g;
    // zero cells already excluded; kappa equals the sum over positive cells
    double k = entropy_kappa(g, q, 3.0);
    REQUIRE(std::isfinite(k));
    REQUIRE(k > 0.0);
}

TEST_CASE("stability bound is enforced") {
    Potential p = make_double_well_1d();
    DensityGrid dg = DensityGrid::gibbs(p, 4.0, -2.0, 2.0, 200, FpBoundary::no_flux);
    CoolingSchedule frozen(1e6, 4.0);
    REQUIRE_THROWS_AS(evolve(dg, p, frozen, 1.0, 1e-2), std::invalid_argument);
}

TEST_CASE("entropy super bound holds on a quadratic annealing run") {
    Potential q = make_quadratic(1);
    const double beta0 = 4.0, alpha0 = 0.5;
    DensityGrid f0 = DensityGrid::from_function(-6.0, 6.0, 300, FpBoundary::no_flux,
                                                [](double x) {
                                                    double z = (x - 1.0) / 0.3;
                                                    return std::exp(-0.5 * z * z);
                                                });
    CoolingSchedule s(1.0, beta0);
    FpRunResult run = evolve(f0, q, s, 20.0, 2e-4, {0.5, 1, 2, 5, 10, 20});
    double a0 = 1.0 / partition_function(q, alpha0, Domain::box({-6.0}, {6.0}), 1200);
    BoundReport rep = verify_super_bound(run, beta0, alpha0, a0);
    REQUIRE(rep.holds);
    REQUIRE(rep.max_ratio < 1.0);
    REQUIRE_THROWS_AS(verify_super_bound(run, 0.4, alpha0, a0), std::invalid_argument);
}

TEST_CASE("degenerate start at the Gibbs state satisfies the super bound at t=0") {
    Potential dw = make_double_well_1d();
    const double beta0 = 4.0, alpha0 = 0.5;
    DensityGrid f0 = DensityGrid::gibbs(dw, beta0, -2.0, 2.0, 200, FpBoundary::no_flux);
    double u0 = moment_U(f0, dw);
    double kappa0 = entropy_kappa(f0, dw, beta0);
    double a0 = 1.0 / partition_function(dw, alpha0, Domain::box({-2.0}, {2.0}), 1000);
    REQUIRE(u0 <= (kappa0 - std::log(a0)) / (beta0 - alpha0));
}

TEST_CASE("chi-square bound holds on the periodic annealing run") {
    // the torus carries the capped potential, whose gradient stays moderate
    Potential uk = make_torus(make_double_well_1d(), 2.0, 2.6).capped;
    DensityGrid f0 = DensityGrid::from_function(-2.6, 2.6, 130, FpBoundary::periodic,
                                                [](double) { return 1.0; });
    CoolingSchedule s(2.0, 6.0);
    FpRunResult run = evolve(f0, uk, s, 2.0, 2e-4, {0.5, 1.0, 2.0});
    BoundReport rep = verify_chi_square_bound(run, uk);
    REQUIRE(rep.holds);
    REQUIRE(rep.bound >= 2.0);

    // constant beta from the Gibbs state: the functional sits at 1 <= 2
    DensityGrid g0 = DensityGrid::gibbs(uk, 2.0, -2.6, 2.6, 130, FpBoundary::periodic);
    CoolingSchedule frozen(1e6, 2.0);
    FpRunResult run2 = evolve(g0, uk, frozen, 1.0, 2e-4, {0.5, 1.0});
    BoundReport rep2 = verify_chi_square_bound(run2, uk);
    REQUIRE(rep2.holds);
    for (double v : rep2.trajectory) REQUIRE(v == Catch::Approx(1.0).margin(1e-8));

    // no-flux runs are rejected
    Potential dw = make_double_well_1d();
    DensityGrid nf = DensityGrid::gibbs(dw, 2.0, -2.0, 2.0, 100, FpBoundary::no_flux);
    CoolingSchedule frozen2(1e6, 2.0);
    FpRunResult run3 = evolve(nf, dw, frozen2, 0.1, 2e-5);
    REQUIRE_THROWS_AS(verify_chi_square_bound(run3, dw), std::invalid_argument);
}

TEST_CASE("sharply peaked starts never exceed their initial chi-square") {
    Potential uk = make_torus(make_double_well_1d(), 2.0, 2.6).capped;
    DensityGrid f0 = DensityGrid::from_function(-2.6, 2.6, 130, FpBoundary::periodic,
                                                [](double x) {
                                                    double z = x / 0.15;
                                                    return std::exp(-0.5 * z * z);
                                                });
    CoolingSchedule s(2.0, 6.0);
    FpRunResult run = evolve(f0, uk, s, 2.0, 2e-4, {0.2, 0.5, 1.0, 2.0});
    BoundReport rep = verify_chi_square_bound(run, uk);
    REQUIRE(rep.holds);
    REQUIRE(rep.trajectory.front() == rep.max_value);
}

TEST_CASE("integrated entropy inequality h_t <= h_0 + int beta' u") {
    Potential dw = make_double_well_1d();
    DensityGrid f0 = DensityGrid::gibbs(dw, 0.5, -2.0, 2.0, 200, FpBoundary::no_flux);
    CoolingSchedule s(2.0, 0.5);
    std::vector<double> cps;
    for (int k = 1; k <= 40; ++k) cps.push_back(0.25 * k);
    FpRunResult run = evolve(f0, dw, s, 10.0, 1e-4, cps);
    REQUIRE(entropy_inequality_slack(run, s) <= 1e-4);
}

TEST_CASE("input validation") {
    Potential dw = make_double_well_1d();
    REQUIRE_THROWS_AS(DensityGrid::from_function(-1.0, 1.0, 4, FpBoundary::no_flux,
                                                 [](double) { return 1.0; }),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(DensityGrid::from_function(-1.0, 1.0, 100, FpBoundary::no_flux,
                                                 [](double) { return -1.0; }),
                      std::invalid_argument);
    DensityGrid ok = DensityGrid::gibbs(dw, 1.0, -2.0, 2.0, 100, FpBoundary::no_flux);
    CoolingSchedule s(1.0, 1.0);
    REQUIRE_THROWS_AS(evolve(ok, dw, s, -1.0, 1e-4), std::invalid_argument);
    REQUIRE_THROWS_AS(evolve(ok, dw, s, 1.0, 0.0), std::invalid_argument);
}
