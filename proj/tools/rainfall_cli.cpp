// Command-line front end. Every subcommand reads a JSON config; the flags
// override the matching config fields. The JSON summary goes to stdout,
// progress and errors to stderr.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "rainfall/rainfall.h"

namespace {

enum ExitCode : int {
    exit_ok = 0,
    exit_internal = 1,
    exit_validation = 2,
    exit_domain = 3,
    exit_numeric = 4,
    exit_io = 5,
};

int exit_code(rf_status status) {
    switch (status) {
        case RF_OK: return exit_ok;
        case RF_INVALID_ARGUMENT: return exit_validation;
        case RF_DOMAIN: return exit_domain;
        case RF_NUMERIC: return exit_numeric;
        case RF_IO: return exit_io;
        default: return exit_internal;
    }
}

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
};

int run(const std::string& command, const Options& options) {
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    if (!options.config.empty()) {
        std::ifstream in(options.config);
        if (!in) {
            std::cerr << "error: cannot open config " << options.config << "\n";
            return exit_io;
        }
        try {
            config = nlohmann::ordered_json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            std::cerr << "error: malformed config " << options.config << ": " << e.what() << "\n";
            return exit_validation;
        }
        if (!config.is_object()) {
            std::cerr << "error: config must be a JSON object\n";
            return exit_validation;
        }
    }
    if (options.seed) config["seed"] = *options.seed;
    if (options.threads) config["threads"] = *options.threads;
    if (options.out) config["out"] = *options.out;

    std::cerr << "rainfall " << rf_version() << ": running " << command << "\n";
    char* result = nullptr;
    const rf_status status = rf_run_command(command.c_str(), config.dump().c_str(), &result);
    if (status != RF_OK) {
        std::cerr << "error (" << command << "): " << rf_last_error() << "\n";
        return exit_code(status);
    }
    std::cout << result;
    if (result && *result) std::cout << "\n";
    rf_string_free(result);
    std::cerr << command << ": done\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levy-driven CARMA rainfall model: fitting, simulation and futures pricing"};
    app.require_subcommand(1);

    Options options;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
    const char* commands[][2] = {
        {"fit", "Fit seasonality, CARMA kernel and Levy parameters to a series"},
        {"simulate", "Simulate rainfall paths from a fitted model"},
        {"diagnose", "Compare simulations of a fitted model with the data"},
        {"price", "Futures prices over a grid of market prices of risk"},
        {"calibrate", "Market price of risk implied by futures quotes"},
        {"bootstrap", "Stationary block bootstrap confidence intervals"},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c[0], c[1]);
        sub->add_option("--config", options.config, "JSON configuration file");
        sub->add_option("--seed", seed, "Random seed (overrides the config)");
        sub->add_option("--threads", threads, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "Output directory (overrides the config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_validation;
    }

    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed")) options.seed = seed;
    if (sub->count("--threads")) options.threads = threads;
    if (sub->count("--out")) options.out = out;
    return run(sub->get_name(), options);
}
