#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "gesp/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"gespfact: factor a discretized generalized random field into a linear "
                 "transformation of white noise, and back"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int modes = 0;
    int realizations = 0;
    bool seed_set = false, out_set = false, modes_set = false, realizations_set = false;

    const std::vector<std::string> names = {"kl", "color", "whiten", "roundtrip", "bank",
                                            "verify"};
    const std::vector<std::string> descriptions = {
        "eigendecompose the covariance kernel (eigs.csv, modes.csv, kl_report.json)",
        "factor the process as L applied to white noise (operator.json, wn_model.json, "
        "cov_check.json)",
        "transform the process into white noise (whiten_report.json)",
        "run both factorizations plus Monte-Carlo verification (roundtrip_report.json)",
        "export the Hermite test-function bank (bank.csv)",
        "replay a stored roundtrip report and check bit-identity (verify_report.json)"};
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto* sub = app.add_subcommand(names[i], descriptions[i]);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)")
            ->each([&](const std::string&) { out_set = true; });
        sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--modes", modes, "mode-count override")->each([&](const std::string&) {
            modes_set = true;
        });
        sub->add_option("--realizations", realizations, "realization-count override")
            ->each([&](const std::string&) { realizations_set = true; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        gesp::RunConfig config = gesp::parse_config(config_path);
        // Flag overrides beat config values.
        if (out_set) config.output_dir = out_dir;
        if (seed_set) config.seed = seed;
        if (modes_set) config.modes = modes;
        if (realizations_set) config.realizations = realizations;
        return gesp::run_subcommand(app.get_subcommands().front()->get_name(), config);
    } catch (const gesp::Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return e.category() == gesp::ErrorCategory::Validation ? gesp::kExitValidation
                                                               : gesp::kExitNumeric;
    }
}
