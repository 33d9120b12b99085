#include <anneal/anneal.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"annealing diffusion experiments: barriers, Gibbs analytics, spectral gaps, "
                 "Fokker-Planck runs, and Monte Carlo ensembles"};

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> workers_override;
    std::optional<std::string> out_override;

    app.add_option("--config", config_path, "experiment config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed_override, "override the config's master seed");
    app.add_option("--workers", workers_override, "override the config's worker count");
    app.add_option("--out", out_override,
                   "output directory (default: config value, or $ANNEAL_OUT_DIR)");

    CLI11_PARSE(app, argc, argv);

    try {
        anneal::ExperimentConfig cfg =
            anneal::parse_and_validate(std::filesystem::path(config_path));
        if (seed_override) cfg.seed = *seed_override;
        if (workers_override) cfg.workers = *workers_override;
        if (out_override) {
            cfg.output_dir = *out_override;
        } else if (const char* env = std::getenv("ANNEAL_OUT_DIR");
                   env && cfg.output_dir == ".") {
            cfg.output_dir = env;
        }
        int code = anneal::dispatch(cfg);
        if (code != anneal::exit_ok) std::cerr << "error: dispatch failed\n";
        return code;
    } catch (const anneal::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return anneal::exit_validation;
    } catch (const std::runtime_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return anneal::exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return anneal::exit_generic;
    }
}
