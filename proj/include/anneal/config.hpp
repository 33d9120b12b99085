#pragma once

#include "anneal/barriers.hpp"
#include "anneal/builtins.hpp"
#include "anneal/ensemble.hpp"
#include "anneal/fokker_planck.hpp"
#include "anneal/gibbs.hpp"
#include "anneal/io.hpp"
#include "anneal/spectral.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace anneal {

// exit codes, documented in docs/cli.md
enum ExitCode : int {
    exit_ok = 0,
    exit_generic = 1,
    exit_validation = 2,
    exit_numeric = 3,
    exit_acceptance = 4,
};

struct ConfigError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ConfigError(std::vector<std::string> v)
        : std::runtime_error(join(v)), violations(std::move(v)) {}
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "invalid config:";
        for (const auto& msg : v) s += "\n  - " + msg;
        return s;
    }
};

struct ExperimentConfig {
    int schema_version = 1;
    std::string kind;  // run | barriers | gibbs | spectral | fp1d | phase | explosion
    nlohmann::json potential_spec;
    // schedule
    std::optional<double> c;
    std::optional<double> multiplier;
    double beta0 = 1.0;
    // budgets
    std::size_t N = 500;
    double horizon = 1e4;
    double dt_max = 1e-2;
    int resolution = 400;
    std::vector<double> checkpoints;
    // events
    double eps = 0.2;
    double K = 2.0;
    double A = 0.5;
    double R_explode = 1e60;
    std::vector<double> alphas{0.5, 1.0, 1.5};
    // per-kind extras
    std::vector<double> betas;
    std::vector<double> multipliers;
    std::vector<double> x0{0.0};
    double torus_K = 2.0;
    double torus_L = 2.6;
    std::string boundary = "no_flux";  // fp1d
    std::vector<double> grid_lo{-2.0}, grid_hi{2.0};
    double fp_dt = 0.0;  // 0: auto from stability
    nlohmann::json f0 = {{"type", "gibbs"}};
    // plumbing
    std::uint64_t seed = 12345;
    int workers = 0;
    std::string output_dir = ".";

    nlohmann::json resolved() const {
        nlohmann::json j;
        j["schema_version"] = schema_version;
        j["kind"] = kind;
        j["potential"] = potential_spec;
        nlohmann::json sched;
        if (c) sched["c"] = *c;
        if (multiplier) sched["multiplier"] = *multiplier;
        sched["beta0"] = beta0;
        j["schedule"] = sched;
        j["budget"] = {{"N", N},
                       {"T", horizon},
                       {"dt_max", dt_max},
                       {"resolution", resolution},
                       {"checkpoints", checkpoints},
                       {"fp_dt", fp_dt}};
        j["events"] = {{"eps", eps}, {"K", K}, {"A", A}, {"R_explode", R_explode},
                       {"alphas", alphas}};
        j["betas"] = betas;
        j["multipliers"] = multipliers;
        j["x0"] = x0;
        j["torus"] = {{"K", torus_K}, {"L", torus_L}};
        j["boundary"] = boundary;
        j["grid"] = {{"lo", grid_lo}, {"hi", grid_hi}};
        j["f0"] = f0;
        j["seed"] = seed;
        j["workers"] = workers;
        j["output_dir"] = output_dir;
        return j;
    }
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                       const std::string& where, std::vector<std::string>& bad) {
    for (auto& [key, _] : obj.items())
        if (!allowed.count(key)) bad.push_back(where + ": unknown key '" + key + "'");
}

template <class T>
bool get_if(const nlohmann::json& obj, const char* key, T& out, const std::string& where,
            std::vector<std::string>& bad) {
    if (!obj.contains(key)) return false;
    try {
        out = obj.at(key).get<T>();
        return true;
    } catch (const nlohmann::json::exception&) {
        bad.push_back(where + ": key '" + std::string(key) + "' has the wrong type");
        return false;
    }
}

} // namespace detail

inline ExperimentConfig parse_and_validate(const nlohmann::json& j) {
    std::vector<std::string> bad;
    ExperimentConfig cfg;

    detail::check_keys(j,
                       {"schema_version", "kind", "potential", "schedule", "budget", "events",
                        "betas", "multipliers", "x0", "torus", "boundary", "grid", "f0", "seed",
                        "workers", "output_dir"},
                       "config", bad);

    detail::get_if(j, "schema_version", cfg.schema_version, "config", bad);
    if (cfg.schema_version != 1) bad.push_back("config: unsupported schema_version");

    if (!detail::get_if(j, "kind", cfg.kind, "config", bad))
        bad.push_back("config: missing required key 'kind'");
    static const std::set<std::string> kinds{"run",  "barriers", "gibbs",    "spectral",
                                             "fp1d", "phase",    "explosion"};
    if (!cfg.kind.empty() && !kinds.count(cfg.kind))
        bad.push_back("config: kind '" + cfg.kind + "' is not one of run|barriers|gibbs|"
                      "spectral|fp1d|phase|explosion");

    if (j.contains("potential")) {
        cfg.potential_spec = j.at("potential");
        try {
            (void)potential_from_config(cfg.potential_spec);
        } catch (const std::exception& e) {
            bad.push_back(std::string("potential: ") + e.what());
        }
    } else if (cfg.kind != "explosion") {
        bad.push_back("config: missing required key 'potential'");
    }

    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        detail::check_keys(s, {"c", "multiplier", "beta0"}, "schedule", bad);
        double v;
        if (detail::get_if(s, "c", v, "schedule", bad)) cfg.c = v;
        if (detail::get_if(s, "multiplier", v, "schedule", bad)) cfg.multiplier = v;
        detail::get_if(s, "beta0", cfg.beta0, "schedule", bad);
        if (cfg.c && cfg.multiplier)
            bad.push_back("schedule: keys 'c' and 'multiplier' are mutually exclusive, "
                          "set exactly one");
        if (cfg.c && !(*cfg.c > 0.0)) bad.push_back("schedule: c must be > 0");
        if (cfg.multiplier && !(*cfg.multiplier > 0.0))
            bad.push_back("schedule: multiplier must be > 0");
        if (!(cfg.beta0 > 0.0)) bad.push_back("schedule: beta0 must be > 0");
    }

    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        detail::check_keys(b, {"N", "T", "dt_max", "resolution", "checkpoints", "fp_dt"},
                           "budget", bad);
        detail::get_if(b, "N", cfg.N, "budget", bad);
        detail::get_if(b, "T", cfg.horizon, "budget", bad);
        detail::get_if(b, "dt_max", cfg.dt_max, "budget", bad);
        detail::get_if(b, "resolution", cfg.resolution, "budget", bad);
        detail::get_if(b, "checkpoints", cfg.checkpoints, "budget", bad);
        detail::get_if(b, "fp_dt", cfg.fp_dt, "budget", bad);
        if (!(cfg.horizon > 0.0)) bad.push_back("budget: T must be > 0");
        if (!(cfg.dt_max > 0.0)) bad.push_back("budget: dt_max must be > 0");
        if (cfg.resolution < 4) bad.push_back("budget: resolution must be >= 4");
    }

    if (j.contains("events")) {
        const auto& e = j.at("events");
        detail::check_keys(e, {"eps", "K", "A", "R_explode", "alphas"}, "events", bad);
        detail::get_if(e, "eps", cfg.eps, "events", bad);
        detail::get_if(e, "K", cfg.K, "events", bad);
        detail::get_if(e, "A", cfg.A, "events", bad);
        detail::get_if(e, "R_explode", cfg.R_explode, "events", bad);
        detail::get_if(e, "alphas", cfg.alphas, "events", bad);
        if (!(cfg.eps > 0.0)) bad.push_back("events: eps must be > 0");
    }

    detail::get_if(j, "betas", cfg.betas, "config", bad);
    detail::get_if(j, "multipliers", cfg.multipliers, "config", bad);
    detail::get_if(j, "x0", cfg.x0, "config", bad);
    if (j.contains("torus")) {
        const auto& t = j.at("torus");
        detail::check_keys(t, {"K", "L"}, "torus", bad);
        detail::get_if(t, "K", cfg.torus_K, "torus", bad);
        detail::get_if(t, "L", cfg.torus_L, "torus", bad);
    }
    detail::get_if(j, "boundary", cfg.boundary, "config", bad);
    if (cfg.boundary != "no_flux" && cfg.boundary != "periodic")
        bad.push_back("config: boundary must be 'no_flux' or 'periodic'");
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        detail::check_keys(g, {"lo", "hi"}, "grid", bad);
        detail::get_if(g, "lo", cfg.grid_lo, "grid", bad);
        detail::get_if(g, "hi", cfg.grid_hi, "grid", bad);
    }
    if (j.contains("f0")) cfg.f0 = j.at("f0");
    detail::get_if(j, "seed", cfg.seed, "config", bad);
    detail::get_if(j, "workers", cfg.workers, "config", bad);
    detail::get_if(j, "output_dir", cfg.output_dir, "config", bad);

    // per-kind requirements
    if (cfg.kind == "run" || cfg.kind == "phase") {
        if (!cfg.c && !cfg.multiplier && cfg.kind == "run")
            bad.push_back("schedule: 'run' needs c or multiplier");
        if (cfg.kind == "phase" && cfg.multipliers.size() < 2)
            bad.push_back("config: 'phase' needs >= 2 multipliers");
    }
    if ((cfg.kind == "gibbs" || cfg.kind == "spectral") && cfg.betas.empty())
        bad.push_back("config: '" + cfg.kind + "' needs a nonempty 'betas' list");

    if (!bad.empty()) throw ConfigError(std::move(bad));
    return cfg;
}

inline ExperimentConfig parse_and_validate(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file " + path.string()});
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError({std::string("JSON parse error: ") + e.what()});
    }
    return parse_and_validate(j);
}

namespace detail {

inline DensityGrid make_f0(const ExperimentConfig& cfg, const Potential& p, FpBoundary bc) {
    double lo = cfg.grid_lo[0], hi = cfg.grid_hi[0];
    int n = cfg.resolution;
    std::string type = cfg.f0.value("type", std::string("gibbs"));
    if (type == "gibbs") return DensityGrid::gibbs(p, cfg.beta0, lo, hi, n, bc);
    if (type == "uniform")
        return DensityGrid::from_function(lo, hi, n, bc, [](double) { return 1.0; });
    if (type == "gaussian") {
        double center = cfg.f0.value("center", 0.0);
        double sigma = cfg.f0.value("sigma", 0.2);
        return DensityGrid::from_function(lo, hi, n, bc, [=](double x) {
            double z = (x - center) / sigma;
            return std::exp(-0.5 * z * z);
        });
    }
    throw ConfigError({"f0: unknown type '" + type + "'"});
}

inline double schedule_c(const ExperimentConfig& cfg, const Potential& p) {
    if (cfg.c) return *cfg.c;
    if (cfg.multiplier) {
        double cs = p.known_c_star.value_or(0.0);
        return *cfg.multiplier * (cs > 0.0 ? cs : 0.5);
    }
    return 1.0;
}

} // namespace detail

// Runs the experiment the config selects and writes results.csv plus a
// summary.json sidecar (metadata, seeds, resolved config) into output_dir.
inline int dispatch(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::path out(cfg.output_dir);
    fs::create_directories(out);
    write_json(out / "config_resolved.json", cfg.resolved());

    nlohmann::json summary;
    summary["kind"] = cfg.kind;
    summary["seed"] = cfg.seed;

    if (cfg.kind == "barriers") {
        Potential p = potential_from_config(cfg.potential_spec);
        GridSpec g(cfg.grid_lo, cfg.grid_hi, std::vector<int>(p.dim, cfg.resolution + 1));
        BarrierResult br = c_star(g, g.sample_values(p));
        summary["c_star"] = br.c_star;
        summary["saddle_level"] = br.saddle_level;
        summary["global_min_value"] = br.global_min_value;
        std::vector<std::vector<double>> rows;
        for (const auto& ev : br.merge_events)
            rows.push_back({ev.level, ev.component_min, ev.depth()});
        write_csv(out / "results.csv", {"merge_level", "component_min", "depth"}, rows);
    } else if (cfg.kind == "gibbs") {
        Potential p = potential_from_config(cfg.potential_spec);
        Domain dom = default_domain(p);
        double alpha0 = p.alpha0.value_or(0.5);
        double z_alpha0 = partition_function(p, alpha0, dom, cfg.resolution);
        std::vector<std::vector<double>> rows;
        for (double b : cfg.betas) {
            double z = partition_function(p, b, dom, cfg.resolution);
            double tail = tail_mass(p, b, cfg.eps, dom, cfg.resolution);
            double bound = z_alpha0 / z * std::exp(-(b - alpha0) * cfg.eps);
            rows.push_back({b, z, tail, bound});
        }
        write_csv(out / "results.csv", {"beta", "Z", "tail", "bound"}, rows);
    } else if (cfg.kind == "spectral") {
        Potential p = potential_from_config(cfg.potential_spec);
        TorusSpec ts = make_torus(p, cfg.torus_K, cfg.torus_L);
        std::vector<std::vector<double>> rows;
        for (double b : cfg.betas) {
            GapResult gr = spectral_gap(assemble(ts, b, cfg.resolution));
            rows.push_back({b, gr.gap, gr.lambda0});
        }
        write_csv(out / "results.csv", {"beta", "gap", "lambda0"}, rows);
        if (cfg.betas.size() >= 6) {
            GapFit fit = fit_gap_exponent(ts, cfg.betas, cfg.resolution);
            summary["fit"] = {{"rate", fit.rate}, {"gamma", fit.gamma}};
        }
    } else if (cfg.kind == "fp1d") {
        Potential p = potential_from_config(cfg.potential_spec);
        FpBoundary bc = cfg.boundary == "periodic" ? FpBoundary::periodic : FpBoundary::no_flux;
        DensityGrid dg = detail::make_f0(cfg, p, bc);
        CoolingSchedule sched(detail::schedule_c(cfg, p), cfg.beta0);
        double dt = cfg.fp_dt;
        if (dt <= 0.0) {
            // auto: half the positivity bound at the stiffest beta
            double h = dg.h;
            double bmax = sched.beta(cfg.horizon);
            double worst = 0.0;
            for (int i = 0; i < dg.n(); ++i)
                worst = std::max(worst, std::abs(p.gradient1(dg.center(i))));
            dt = 0.5 * h * h / (1.0 + 0.5 * bmax * worst * h) * 0.5;
        }
        FpRunResult run = evolve(dg, p, sched, cfg.horizon, dt, cfg.checkpoints);
        std::vector<std::vector<double>> rows;
        for (const auto& cp : run.checkpoints)
            rows.push_back({cp.t, cp.beta, cp.mass, cp.u, cp.kappa});
        write_csv(out / "results.csv", {"t", "beta", "mass", "u", "kappa"}, rows);
        summary["steps"] = run.steps;
        summary["clipped_cells"] = run.clipped_cells;
    } else if (cfg.kind == "run") {
        Potential p = potential_from_config(cfg.potential_spec);
        double cs = p.known_c_star.value_or(0.0);
        double mult = cfg.multiplier ? *cfg.multiplier
                                     : (cs > 0.0 ? *cfg.c / cs : *cfg.c / 0.5);
        StepPolicy policy;
        policy.dt_max = cfg.dt_max;
        EnsembleStats st =
            run_success_experiment(p, mult, cfg.beta0, cfg.x0, cfg.eps, cfg.horizon, cfg.N,
                                   cfg.seed, cfg.checkpoints, policy, cfg.workers);
        std::vector<std::vector<double>> rows;
        for (const auto& est : st.exceed)
            rows.push_back({est.t, est.p, est.interval.lo, est.interval.hi});
        write_csv(out / "results.csv", {"t", "p_exceed", "wilson_lo", "wilson_hi"}, rows);
        summary["final_success"] = st.final_success();
        summary["errors"] = st.errors;
        summary["exploded"] = st.exploded;
    } else if (cfg.kind == "phase") {
        Potential p = potential_from_config(cfg.potential_spec);
        StepPolicy policy;
        policy.dt_max = cfg.dt_max;
        PhaseSweepResult res =
            run_phase_sweep(p, cfg.multipliers, cfg.beta0, cfg.x0, cfg.eps, cfg.horizon, cfg.N,
                            cfg.seed, cfg.checkpoints, policy, cfg.workers);
        std::vector<std::vector<double>> rows;
        for (const auto& row : res.rows)
            rows.push_back({row.multiplier, row.c, row.success, row.interval.lo,
                            row.interval.hi});
        write_csv(out / "results.csv",
                  {"multiplier", "c", "success", "wilson_lo", "wilson_hi"}, rows);
        summary["monotone_within_2se"] = res.monotone_within_2se;
        summary["violations"] = res.violations;
    } else if (cfg.kind == "explosion") {
        auto table = run_explosion_experiment(cfg.alphas, cfg.x0, cfg.beta0, cfg.horizon,
                                              cfg.R_explode, cfg.N, cfg.seed, cfg.workers);
        std::vector<std::vector<double>> rows;
        for (const auto& row : table)
            rows.push_back({row.alpha, row.fraction, row.interval.lo, row.interval.hi,
                            row.mean_explode_time, static_cast<double>(row.errors)});
        write_csv(out / "results.csv",
                  {"alpha", "fraction", "wilson_lo", "wilson_hi", "mean_explode_time",
                   "errors"},
                  rows);
    } else {
        return exit_validation;
    }
    write_json(out / "summary.json", summary);
    return exit_ok;
}

} // namespace anneal
