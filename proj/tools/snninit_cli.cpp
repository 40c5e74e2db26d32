#include <CLI11.hpp>

#include "snninit/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Firing-rate and gradient-flow toolkit for discrete-time spiking networks"};

    snninit::ExperimentConfig cfg;
    std::string config_path;
    app.add_option("--experiment", cfg.experiment,
                   "one of: collapse-sweep, rw-correct, wiener-correct, permutation-correct, "
                   "distributions, multilayer-rates, gradient-variance, rate-solver")
        ->required();
    app.add_option("--config", config_path, "key = value config file with parameter overrides");
    app.add_option("--seed", cfg.seed, "master RNG seed");
    app.add_option("--repeats", cfg.repeats, "Monte-Carlo repeats (0 = experiment default)");
    app.add_option("--out", cfg.out_dir, "output directory for CSV/SVG/manifest files");

    CLI11_PARSE(app, argc, argv);

    if (!config_path.empty()) {
        try {
            cfg.overrides = snninit::KeyValueTree::load(config_path);
        } catch (const std::exception& ex) {
            std::cerr << "config error: " << ex.what() << '\n';
            return 2;
        }
    }
    return snninit::run_experiment(cfg);
}
